//! Chip-level simulation of the received signal, used as an empirical check
//! of the analytic SINR expressions and of `f(γ)` as a packet-success model.
//!
//! Frames are processed in fixed-size chunks, each with its own derived
//! seed, and chunk statistics are merged in chunk order. Results therefore
//! depend only on `(seed, n)`, not on how chunks are scheduled.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::game::Game;
use crate::linalg::dot;
use crate::receivers::{receiver_filter, Channel, ReceiverKind};
use crate::rng;

/// Frames per chunk.
pub const CHUNK_FRAMES: usize = 4096;
/// Packets per chunk.
pub const CHUNK_PACKETS: usize = 64;
pub const MIN_FRAMES: usize = 1000;

/// One symbol interval at a receiver: `r = Σ_j √p_j h_j b_j s_j + w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    /// BPSK symbols `b_j ∈ {−1, +1}`.
    pub symbols: Vec<f64>,
    /// `w ~ N(0, σ² I)`.
    pub noise: Vec<f64>,
    pub received: Vec<f64>,
}

impl SymbolFrame {
    pub fn draw(ch: &Channel<'_>, rng: &mut ChaCha8Rng) -> Self {
        let n = ch.codes.chips();
        let sigma = libm::sqrt(ch.noise_power);
        let symbols: Vec<f64> = (0..ch.codes.users())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let noise: Vec<f64> = (0..n)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut received = noise.clone();
        for (j, &b) in symbols.iter().enumerate() {
            let amp = libm::sqrt(ch.powers[j]) * ch.gains[j] * b;
            if amp != 0.0 {
                for (r, s) in received.iter_mut().zip(ch.codes.code(j)) {
                    *r += amp * s;
                }
            }
        }
        SymbolFrame {
            symbols,
            noise,
            received,
        }
    }
}

/// Power sums of the interference-plus-noise term at the filter output.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentAccumulator {
    pub count: u64,
    pub sums: [f64; 4],
}

impl MomentAccumulator {
    pub fn push(&mut self, z: f64) {
        self.count += 1;
        let z2 = z * z;
        self.sums[0] += z;
        self.sums[1] += z2;
        self.sums[2] += z2 * z;
        self.sums[3] += z2 * z2;
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.count += other.count;
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a += b;
        }
    }

    /// `(unbiased variance, fourth central moment)`.
    fn central_moments(&self) -> (f64, f64) {
        let n = self.count as f64;
        let [s1, s2, s3, s4] = self.sums.map(|s| s / n);
        let mu = s1;
        let m2 = s2 - mu * mu;
        let m4 = s4 - 4.0 * mu * s3 + 6.0 * mu * mu * s2 - 3.0 * mu * mu * mu * mu;
        (m2 * n / (n - 1.0), m4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrEstimate {
    pub sinr: f64,
    pub std_error: f64,
    pub frames: u64,
    /// Sample variance of the interference-plus-noise term.
    pub interference_variance: f64,
}

impl SinrEstimate {
    /// `|γ̂ − γ|` in standard errors.
    pub fn z_score(&self, analytic: f64) -> f64 {
        libm::fabs(self.sinr - analytic) / self.std_error
    }
}

/// Interference-plus-noise moments for chunk `index` of a run seeded by `seed`.
pub fn simulate_chunk(
    filter: &[f64],
    k: usize,
    ch: &Channel<'_>,
    frames: usize,
    seed: u64,
    index: u64,
) -> MomentAccumulator {
    let mut rng = rng::stream(rng::derive_seed(seed, index), rng::STREAM_MONTE_CARLO);
    let desired_gain = libm::sqrt(ch.powers[k]) * ch.gains[k] * dot(filter, ch.codes.code(k));
    let mut acc = MomentAccumulator::default();
    for _ in 0..frames {
        let frame = SymbolFrame::draw(ch, &mut rng);
        let y = dot(filter, &frame.received);
        acc.push(y - desired_gain * frame.symbols[k]);
    }
    acc
}

fn check_channel(filter: &[f64], k: usize, ch: &Channel<'_>) -> Result<()> {
    if k >= ch.codes.users()
        || ch.powers.len() != ch.codes.users()
        || ch.gains.len() != ch.codes.users()
        || filter.len() != ch.codes.chips()
    {
        return Err(Error::InvalidArgument("dimension mismatch"));
    }
    Ok(())
}

/// SINR estimated from `n_frames` simulated frames with filter `filter`:
/// desired-term power over the sample variance of the remainder `y − D`.
pub fn empirical_sinr_with_filter(
    filter: &[f64],
    k: usize,
    ch: &Channel<'_>,
    n_frames: usize,
    seed: u64,
) -> Result<SinrEstimate> {
    check_channel(filter, k, ch)?;
    if n_frames < MIN_FRAMES {
        return Err(Error::InvalidArgument("need at least 1000 frames"));
    }
    let mut acc = MomentAccumulator::default();
    let mut done = 0;
    let mut index = 0;
    while done < n_frames {
        let frames = CHUNK_FRAMES.min(n_frames - done);
        acc.merge(&simulate_chunk(filter, k, ch, frames, seed, index));
        done += frames;
        index += 1;
    }
    Ok(finish_estimate(filter, k, ch, &acc))
}

/// Turns merged chunk moments into an estimate.
pub fn finish_estimate(
    filter: &[f64],
    k: usize,
    ch: &Channel<'_>,
    acc: &MomentAccumulator,
) -> SinrEstimate {
    let d = dot(filter, ch.codes.code(k));
    let desired_power = ch.received_power(k) * d * d;
    let (var, m4) = acc.central_moments();
    let n = acc.count as f64;
    let sinr = desired_power / var;
    // delta method on 1/variance
    let std_error = sinr * libm::sqrt(((m4 - var * var) / n).max(0.0)) / var;
    SinrEstimate {
        sinr,
        std_error,
        frames: acc.count,
        interference_variance: var,
    }
}

/// [`empirical_sinr_with_filter`] using user `k`'s receiver in `game`.
pub fn empirical_sinr(
    game: &Game<'_>,
    kind: ReceiverKind,
    k: usize,
    powers: &[f64],
    n_frames: usize,
    seed: u64,
) -> Result<SinrEstimate> {
    let ch = game.channel(k, powers);
    let filter = receiver_filter(kind, k, &ch)?;
    empirical_sinr_with_filter(&filter.coefficients, k, &ch, n_frames, seed)
}

/// Fraction of `n_packets` packets of `packet_bits` bits whose every bit
/// survives hard-decision detection `b̂ = sign(cᵀr)`.
pub fn empirical_packet_success_with_filter(
    filter: &[f64],
    k: usize,
    ch: &Channel<'_>,
    packet_bits: u32,
    n_packets: usize,
    seed: u64,
) -> Result<f64> {
    check_channel(filter, k, ch)?;
    if n_packets < MIN_FRAMES {
        return Err(Error::InvalidArgument("need at least 1000 packets"));
    }
    let mut successes = 0usize;
    let mut done = 0;
    let mut index = 0u64;
    while done < n_packets {
        let packets = CHUNK_PACKETS.min(n_packets - done);
        let mut rng = rng::stream(rng::derive_seed(seed, index), rng::STREAM_MONTE_CARLO);
        for _ in 0..packets {
            let mut ok = true;
            for _ in 0..packet_bits {
                let frame = SymbolFrame::draw(ch, &mut rng);
                let y = dot(filter, &frame.received);
                let decided = if y >= 0.0 { 1.0 } else { -1.0 };
                ok &= decided == frame.symbols[k];
            }
            successes += ok as usize;
        }
        done += packets;
        index += 1;
    }
    Ok(successes as f64 / n_packets as f64)
}

/// [`empirical_packet_success_with_filter`] using user `k`'s receiver in `game`.
pub fn empirical_packet_success(
    game: &Game<'_>,
    kind: ReceiverKind,
    k: usize,
    powers: &[f64],
    n_packets: usize,
    seed: u64,
) -> Result<f64> {
    let ch = game.channel(k, powers);
    let filter = receiver_filter(kind, k, &ch)?;
    empirical_packet_success_with_filter(
        &filter.coefficients,
        k,
        &ch,
        game.config().packet_bits,
        n_packets,
        seed,
    )
}
