//! The physical network: node placement, next-hop routing toward the access
//! point, and Rayleigh-faded channel gains. Also holds [`GameConfig`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, Weibull};

use crate::error::{Error, Result};
use crate::receivers::ReceiverKind;
use crate::rng;

/// Area per node of the placement square, km².
pub const AREA_PER_NODE_KM2: f64 = 100.0;
/// Mean amplitude gain at 1 km.
pub const GAIN_AT_UNIT_DISTANCE: f64 = 0.3;
/// Thermal noise power, W.
pub const DEFAULT_NOISE_POWER: f64 = 5e-16;
/// Placements closer than this (km) to another node or the access point are redrawn.
pub const MIN_SEPARATION_KM: f64 = 1e-3;

/// A point in the plane, in km.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Destination of a node's transmissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Hop {
    Node(usize),
    AccessPoint,
}

impl Hop {
    /// Row index into a gain matrix with `users` node rows followed by the
    /// access point.
    pub fn receiver_index(self, users: usize) -> usize {
        match self {
            Hop::Node(i) => i,
            Hop::AccessPoint => users,
        }
    }
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hop::Node(i) => write!(f, "{i}"),
            Hop::AccessPoint => f.write_str("AP"),
        }
    }
}

/// Node placement around a central access point.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub positions: Vec<Point>,
    pub access_point: Point,
    /// Side of the placement square, km.
    pub side: f64,
}

/// Places `users` nodes uniformly in a square of area `100·users` km²
/// centred on an access point at the origin.
pub fn generate_topology(users: usize, seed: u64) -> Result<Topology> {
    if users == 0 {
        return Err(Error::InvalidArgument("at least one node is required"));
    }
    let side = libm::sqrt(AREA_PER_NODE_KM2 * users as f64);
    let half = side / 2.0;
    let access_point = Point::new(0.0, 0.0);
    let mut rng = rng::stream(seed, rng::STREAM_TOPOLOGY);
    let mut positions: Vec<Point> = Vec::with_capacity(users);
    while positions.len() < users {
        let p = Point::new(
            rng.random_range(-half..half),
            rng.random_range(-half..half),
        );
        let crowded = p.distance(access_point) < MIN_SEPARATION_KM
            || positions.iter().any(|q| q.distance(p) < MIN_SEPARATION_KM);
        if !crowded {
            positions.push(p);
        }
    }
    Ok(Topology {
        positions,
        access_point,
        side,
    })
}

/// Each node forwards to the nearest node that is strictly closer to the
/// access point, or to the access point itself when that is nearer.
/// Exact ties go to the lower node index, and a node wins a tie against the
/// access point.
pub fn compute_routing(positions: &[Point], access_point: Point) -> Vec<Hop> {
    let to_ap: Vec<f64> = positions.iter().map(|p| p.distance(access_point)).collect();
    positions
        .iter()
        .enumerate()
        .map(|(k, &pk)| {
            let mut best = Hop::AccessPoint;
            let mut best_d = to_ap[k];
            for (j, &pj) in positions.iter().enumerate() {
                if j == k || to_ap[j] >= to_ap[k] {
                    continue;
                }
                let d = pj.distance(pk);
                if d < best_d || (d == best_d && best == Hop::AccessPoint) {
                    best = Hop::Node(j);
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// Rayleigh-distributed amplitude gains with mean `0.3·d⁻²` (d in km).
///
/// Returns a `(users + 1) × users` matrix: row `m < users` holds
/// `h_j^{(m)}` for receiving node `m`, the last row the access point. The
/// diagonal `h_m^{(m)}` is 0, which silences a receiving node's own signal.
pub fn sample_channel_gains(
    positions: &[Point],
    access_point: Point,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let users = positions.len();
    let mut rng = rng::stream(seed, rng::STREAM_GAINS);
    let mut rows = Vec::with_capacity(users + 1);
    for m in 0..=users {
        let at = if m == users { access_point } else { positions[m] };
        let mut row = vec![0.0; users];
        for (j, &pj) in positions.iter().enumerate() {
            if j == m {
                continue;
            }
            let d = pj.distance(at);
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(
                    "transmitter and receiver coincide",
                ));
            }
            row[j] = rayleigh_with_mean(GAIN_AT_UNIT_DISTANCE / (d * d)).sample(&mut rng);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Rayleigh law as a shape-2 Weibull; scale chosen so that the mean is `mean`.
pub fn rayleigh_with_mean(mean: f64) -> Weibull<f64> {
    // Weibull(λ, 2) has mean λ·Γ(3/2) = λ·√π/2.
    let scale = 2.0 * mean / libm::sqrt(core::f64::consts::PI);
    Weibull::new(scale, 2.0).expect("positive finite scale")
}

/// One realization of the network.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub positions: Vec<Point>,
    pub access_point: Point,
    pub next_hop: Vec<Hop>,
    /// `gains[m][j] = h_j^{(m)}`, see [`sample_channel_gains`].
    pub gains: Vec<Vec<f64>>,
    /// σ², W.
    pub noise_power: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn generate(users: usize, seed: u64, noise_power: f64) -> Result<Self> {
        let topo = generate_topology(users, seed)?;
        let next_hop = compute_routing(&topo.positions, topo.access_point);
        let gains = sample_channel_gains(&topo.positions, topo.access_point, seed)?;
        let s = Scenario {
            positions: topo.positions,
            access_point: topo.access_point,
            next_hop,
            gains,
            noise_power,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn users(&self) -> usize {
        self.positions.len()
    }

    /// Gains `h_j^{(m(k))}` for all transmitters `j` at user `k`'s receiver.
    pub fn gain_row(&self, k: usize) -> &[f64] {
        &self.gains[self.next_hop[k].receiver_index(self.users())]
    }

    /// Amplitude gain of user `k`'s own link.
    pub fn link_gain(&self, k: usize) -> f64 {
        self.gain_row(k)[k]
    }

    /// Number of hops from `k` to the access point, or `None` on a cycle.
    pub fn hops_to_access_point(&self, k: usize) -> Option<usize> {
        let mut at = k;
        for hops in 1..=self.users() {
            match self.next_hop[at] {
                Hop::AccessPoint => return Some(hops),
                Hop::Node(j) => at = j,
            }
        }
        None
    }

    /// Checks the structural invariants; used after deserializing.
    pub fn validate(&self) -> Result<()> {
        let k = self.users();
        if k == 0 {
            return Err(Error::InvalidArgument("scenario has no nodes"));
        }
        if self.next_hop.len() != k {
            return Err(Error::InvalidArgument("next_hop length differs from node count"));
        }
        if self.gains.len() != k + 1 || self.gains.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidArgument("gain matrix must be (K+1)×K"));
        }
        if !(self.noise_power >= 0.0) || !self.noise_power.is_finite() {
            return Err(Error::InvalidArgument("noise power must be finite and non-negative"));
        }
        let half = libm::sqrt(AREA_PER_NODE_KM2 * k as f64) / 2.0;
        for p in &self.positions {
            if libm::fabs(p.x - self.access_point.x) > half
                || libm::fabs(p.y - self.access_point.y) > half
            {
                return Err(Error::InvalidArgument("node outside the placement square"));
            }
        }
        for (i, hop) in self.next_hop.iter().enumerate() {
            if let Hop::Node(j) = *hop {
                if j == i || j >= k {
                    return Err(Error::InvalidArgument("invalid next hop"));
                }
            }
        }
        if (0..k).any(|i| self.hops_to_access_point(i).is_none()) {
            return Err(Error::InvalidArgument("routing contains a cycle"));
        }
        for (m, row) in self.gains.iter().enumerate() {
            for (j, &h) in row.iter().enumerate() {
                let ok = if j == m { h == 0.0 } else { h > 0.0 && h.is_finite() };
                if !ok {
                    return Err(Error::InvalidArgument(
                        "gains must be positive off the receiver's own entry",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Per-receiver values, indexed by [`ReceiverKind`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerReceiver<T> {
    pub mf: T,
    pub de: T,
    pub mmse: T,
}

impl<T: Copy> PerReceiver<T> {
    pub fn get(&self, kind: ReceiverKind) -> T {
        match kind {
            ReceiverKind::MatchedFilter => self.mf,
            ReceiverKind::Decorrelator => self.de,
            ReceiverKind::Mmse => self.mmse,
        }
    }
}

/// Game and link-layer parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GameConfig {
    pub users: usize,
    /// Processing gain N, chips per bit.
    pub processing_gain: usize,
    /// Information bits per packet, L.
    pub info_bits: u32,
    /// Total bits per packet, M.
    pub packet_bits: u32,
    /// Transmission rate R, bit/s.
    pub rate: f64,
    /// Operating power q_k of each node's receiver, W.
    pub operating_power: Vec<f64>,
    /// Additional operating power for running each receiver type, W; zero by default.
    pub receiver_overhead: PerReceiver<f64>,
    /// P_max, W.
    pub max_power: f64,
    /// Exponent M inside f(γ) = (1 − e^{−γ})^M.
    pub efficiency_exponent: u32,
}

impl GameConfig {
    /// Defaults of the reference experiment: L = M = 100, R = 100 kb/s,
    /// P_max = 100 W and the same `q` for every node.
    pub fn reference(users: usize, processing_gain: usize, q: f64) -> Self {
        GameConfig {
            users,
            processing_gain,
            info_bits: 100,
            packet_bits: 100,
            rate: 1e5,
            operating_power: vec![q; users],
            receiver_overhead: PerReceiver::default(),
            max_power: 100.0,
            efficiency_exponent: 100,
        }
    }

    /// `q_k^{r}`: operating power of user `k` when running receiver `kind`.
    pub fn operating_power(&self, k: usize, kind: ReceiverKind) -> f64 {
        self.operating_power[k] + self.receiver_overhead.get(kind)
    }

    /// `(L/M)·R`, bits per second delivered at unit packet success rate.
    pub fn throughput_scale(&self) -> f64 {
        self.info_bits as f64 / self.packet_bits as f64 * self.rate
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::InvalidArgument("K must be at least 1"));
        }
        if self.processing_gain == 0 {
            return Err(Error::InvalidArgument("N must be at least 1"));
        }
        if self.info_bits > self.packet_bits || self.packet_bits == 0 {
            return Err(Error::InvalidArgument("need 0 < L ≤ M"));
        }
        if !(self.rate > 0.0) {
            return Err(Error::InvalidArgument("rate must be positive"));
        }
        if !(self.max_power > 0.0) {
            return Err(Error::InvalidArgument("P_max must be positive"));
        }
        if self.efficiency_exponent < 2 {
            return Err(Error::InvalidArgument(
                "efficiency exponent must be at least 2 for a sigmoidal f",
            ));
        }
        if self.operating_power.len() != self.users {
            return Err(Error::InvalidArgument("one operating power per user"));
        }
        let o = self.receiver_overhead;
        if self
            .operating_power
            .iter()
            .chain([o.mf, o.de, o.mmse].iter())
            .any(|q| !(*q >= 0.0) || !q.is_finite())
        {
            return Err(Error::InvalidArgument("operating powers must be finite and ≥ 0"));
        }
        Ok(())
    }
}

/// Energy per packet (J) to the equivalent continuous operating power (W)
/// at `packet_bits` bits sent at `rate` bit/s.
pub fn joules_per_packet_to_watts(joules: f64, packet_bits: u32, rate: f64) -> f64 {
    joules * rate / packet_bits as f64
}

/// Inverse of [`joules_per_packet_to_watts`].
pub fn watts_to_joules_per_packet(watts: f64, packet_bits: u32, rate: f64) -> f64 {
    watts * packet_bits as f64 / rate
}
