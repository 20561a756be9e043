//! Spreading codes and the three linear receivers.
//!
//! All SINR evaluations take a [`Channel`], the view of the network from one
//! receiving node: every user's power, every transmitter's amplitude gain to
//! that receiver, and the noise power. A receiving node's own transmitter
//! has gain 0 in its row, so it never shows up as interference.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, Factor};
use crate::rng;

/// Linear receiver types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ReceiverKind {
    #[cfg_attr(feature = "serde", serde(rename = "MF"))]
    MatchedFilter,
    #[cfg_attr(feature = "serde", serde(rename = "DE"))]
    Decorrelator,
    #[cfg_attr(feature = "serde", serde(rename = "MMSE"))]
    Mmse,
}

impl ReceiverKind {
    /// Tie-breaking preference, most preferred first.
    pub const PREFERENCE: [ReceiverKind; 3] = [
        ReceiverKind::Mmse,
        ReceiverKind::Decorrelator,
        ReceiverKind::MatchedFilter,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ReceiverKind::MatchedFilter => "MF",
            ReceiverKind::Decorrelator => "DE",
            ReceiverKind::Mmse => "MMSE",
        }
    }
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MF" | "MATCHED" | "MATCHED_FILTER" => Ok(ReceiverKind::MatchedFilter),
            "DE" | "DECORRELATOR" => Ok(ReceiverKind::Decorrelator),
            "MMSE" => Ok(ReceiverKind::Mmse),
            _ => Err(Error::InvalidArgument("unknown receiver (expected MF, DE or MMSE)")),
        }
    }
}

/// A nonempty subset of receiver kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReceiverSet {
    mask: u8,
}

impl ReceiverSet {
    pub fn all() -> Self {
        ReceiverSet { mask: 0b111 }
    }

    pub fn only(kind: ReceiverKind) -> Self {
        ReceiverSet { mask: Self::bit(kind) }
    }

    pub fn from_kinds(kinds: &[ReceiverKind]) -> Result<Self> {
        let mask = kinds.iter().fold(0, |m, &k| m | Self::bit(k));
        if mask == 0 {
            return Err(Error::InvalidArgument("receiver set is empty"));
        }
        Ok(ReceiverSet { mask })
    }

    fn bit(kind: ReceiverKind) -> u8 {
        match kind {
            ReceiverKind::MatchedFilter => 1,
            ReceiverKind::Decorrelator => 2,
            ReceiverKind::Mmse => 4,
        }
    }

    pub fn contains(self, kind: ReceiverKind) -> bool {
        self.mask & Self::bit(kind) != 0
    }

    pub fn without(self, kind: ReceiverKind) -> Option<Self> {
        let mask = self.mask & !Self::bit(kind);
        (mask != 0).then_some(ReceiverSet { mask })
    }

    /// Members in preference order (MMSE, DE, MF).
    pub fn iter(self) -> impl Iterator<Item = ReceiverKind> {
        ReceiverKind::PREFERENCE
            .into_iter()
            .filter(move |&k| self.contains(k))
    }
}

/// Binary spreading codes `s_k ∈ {±1/√N}^N` and their cross-correlations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(into = "CodeBookRepr", try_from = "CodeBookRepr")
)]
pub struct CodeBook {
    chips: usize,
    signs: Vec<Vec<i8>>,
    codes: Vec<Vec<f64>>,
    rho: Vec<f64>,
}

/// Serialized form: chip signs only.
#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct CodeBookRepr {
    chips: usize,
    signs: Vec<Vec<i8>>,
}

#[cfg(feature = "serde")]
impl From<CodeBook> for CodeBookRepr {
    fn from(c: CodeBook) -> Self {
        CodeBookRepr {
            chips: c.chips,
            signs: c.signs,
        }
    }
}

#[cfg(feature = "serde")]
impl TryFrom<CodeBookRepr> for CodeBook {
    type Error = Error;

    fn try_from(r: CodeBookRepr) -> Result<Self> {
        if r.signs.iter().any(|s| s.len() != r.chips) {
            return Err(Error::InvalidArgument("code length differs from chip count"));
        }
        CodeBook::from_signs(r.signs)
    }
}

impl CodeBook {
    /// Draws `users` codes of `chips` i.i.d. equiprobable ±1/√N entries.
    pub fn generate(users: usize, chips: usize, seed: u64) -> Result<Self> {
        if users == 0 || chips == 0 {
            return Err(Error::InvalidArgument("K and N must be at least 1"));
        }
        let mut rng = rng::stream(seed, rng::STREAM_CODES);
        let signs = (0..users)
            .map(|_| {
                (0..chips)
                    .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                    .collect()
            })
            .collect();
        Self::from_signs(signs)
    }

    /// Like [`CodeBook::generate`], but when `users ≤ chips` redraws until
    /// the decorrelator exists. Returns the codes and the number of draws.
    pub fn generate_decorrelatable(users: usize, chips: usize, seed: u64) -> Result<(Self, u32)> {
        const MAX_DRAWS: u32 = 64;
        let mut draw_seed = seed;
        for draw in 1..=MAX_DRAWS {
            let codes = Self::generate(users, chips, draw_seed)?;
            if users > chips || codes.decorrelator().is_ok() {
                if draw > 1 {
                    log::warn!(
                        "seed {seed}: code Gram matrix singular, redrew codes ({draw} draws)"
                    );
                }
                return Ok((codes, draw));
            }
            draw_seed = rng::derive_seed(seed, draw as u64);
        }
        Err(Error::ReceiverUnavailable(ReceiverKind::Decorrelator))
    }

    /// Builds a code book from ±1 chip signs (one row per user).
    pub fn from_signs(signs: Vec<Vec<i8>>) -> Result<Self> {
        let users = signs.len();
        let chips = signs.first().map_or(0, Vec::len);
        if users == 0 || chips == 0 {
            return Err(Error::InvalidArgument("K and N must be at least 1"));
        }
        if signs
            .iter()
            .any(|s| s.len() != chips || s.iter().any(|&v| v != 1 && v != -1))
        {
            return Err(Error::InvalidArgument("chips must be ±1 and equal length"));
        }
        let amp = 1.0 / libm::sqrt(chips as f64);
        let codes = signs
            .iter()
            .map(|s| s.iter().map(|&v| v as f64 * amp).collect())
            .collect();
        let mut rho = vec![0.0; users * users];
        for i in 0..users {
            for j in 0..users {
                let agree: i64 = signs[i]
                    .iter()
                    .zip(&signs[j])
                    .map(|(&a, &b)| (a * b) as i64)
                    .sum();
                rho[i * users + j] = agree as f64 / chips as f64;
            }
        }
        Ok(CodeBook {
            chips,
            signs,
            codes,
            rho,
        })
    }

    pub fn users(&self) -> usize {
        self.codes.len()
    }

    /// Processing gain N.
    pub fn chips(&self) -> usize {
        self.chips
    }

    pub fn code(&self, k: usize) -> &[f64] {
        &self.codes[k]
    }

    pub fn signs(&self) -> &[Vec<i8>] {
        &self.signs
    }

    /// `ρ_{kj} = s_kᵀ s_j`, exact.
    pub fn rho(&self, k: usize, j: usize) -> f64 {
        self.rho[k * self.users() + j]
    }

    /// Factor of `SᵀS`; fails when `K > N` or the Gram matrix is numerically singular.
    pub fn decorrelator(&self) -> Result<Decorrelator> {
        if self.users() > self.chips {
            return Err(Error::ReceiverUnavailable(ReceiverKind::Decorrelator));
        }
        let gram = Factor::cholesky(&self.rho, self.users())
            .map_err(|_| Error::ReceiverUnavailable(ReceiverKind::Decorrelator))?;
        let users = self.users();
        let norm_sq = (0..users)
            .map(|k| {
                let mut e = vec![0.0; users];
                e[k] = 1.0;
                gram.inverse_quadratic_form(&e)
            })
            .collect();
        Ok(Decorrelator { gram, norm_sq })
    }
}

/// Alias of [`CodeBook::generate`].
pub fn generate_codes(users: usize, chips: usize, seed: u64) -> Result<CodeBook> {
    CodeBook::generate(users, chips, seed)
}

/// Precomputed decorrelator `C = S(SᵀS)⁻¹`.
#[derive(Debug, Clone)]
pub struct Decorrelator {
    gram: Factor,
    /// `c_kᵀ c_k = [(SᵀS)⁻¹]_{kk}`.
    norm_sq: Vec<f64>,
}

impl Decorrelator {
    pub fn filter(&self, k: usize, codes: &CodeBook) -> Vec<f64> {
        let mut e = vec![0.0; codes.users()];
        e[k] = 1.0;
        let w = self.gram.solve(&e);
        let mut c = vec![0.0; codes.chips()];
        for (j, wj) in w.iter().enumerate() {
            for (ci, sj) in c.iter_mut().zip(codes.code(j)) {
                *ci += wj * sj;
            }
        }
        c
    }

    pub fn norm_sq(&self, k: usize) -> f64 {
        self.norm_sq[k]
    }
}

/// The network as seen from one receiving node.
#[derive(Debug, Clone, Copy)]
pub struct Channel<'a> {
    pub codes: &'a CodeBook,
    /// Transmit power of every user, W.
    pub powers: &'a [f64],
    /// Amplitude gain of every transmitter to this receiver.
    pub gains: &'a [f64],
    /// σ², W.
    pub noise_power: f64,
}

impl Channel<'_> {
    /// Received power `p_j h_j²`.
    pub fn received_power(&self, j: usize) -> f64 {
        self.powers[j] * self.gains[j] * self.gains[j]
    }

    fn check(&self, k: usize) -> Result<()> {
        let users = self.codes.users();
        if self.powers.len() != users || self.gains.len() != users || k >= users {
            return Err(Error::InvalidArgument("power/gain vectors must have K entries"));
        }
        if self.powers.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("powers must be finite and ≥ 0"));
        }
        if !(self.noise_power >= 0.0) || !self.noise_power.is_finite() {
            return Err(Error::InvalidArgument("noise power must be finite and ≥ 0"));
        }
        Ok(())
    }
}

/// Receiver coefficients for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFilter {
    pub kind: ReceiverKind,
    pub user: usize,
    pub coefficients: Vec<f64>,
}

/// Factor of `A_k = σ²I + Σ_{j≠k} p_j h_j² s_j s_jᵀ` over `interferers`.
fn interference_factor(
    ch: &Channel<'_>,
    interferers: impl Iterator<Item = usize> + Clone,
) -> Result<Factor> {
    let n = ch.codes.chips();
    if ch.noise_power > 0.0 {
        let mut f = Factor::scaled_identity(n, ch.noise_power);
        for j in interferers {
            f.add_outer(ch.received_power(j), ch.codes.code(j));
        }
        Ok(f)
    } else {
        let mut a = vec![0.0; n * n];
        for j in interferers {
            let w = ch.received_power(j);
            let s = ch.codes.code(j);
            for r in 0..n {
                for c in 0..n {
                    a[r * n + c] += w * s[r] * s[c];
                }
            }
        }
        Factor::cholesky(&a, n)
    }
}

fn others(k: usize, users: usize) -> impl Iterator<Item = usize> + Clone {
    (0..users).filter(move |&j| j != k)
}

fn require_noise(ch: &Channel<'_>) -> Result<()> {
    if ch.noise_power > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("noise power must be positive"))
    }
}

fn mf_gain_factor(k: usize, ch: &Channel<'_>) -> Result<f64> {
    require_noise(ch)?;
    let interference: f64 = others(k, ch.codes.users())
        .map(|j| {
            let r = ch.codes.rho(k, j);
            ch.received_power(j) * r * r
        })
        .sum();
    let h = ch.gains[k];
    Ok(h * h / (ch.noise_power + interference))
}

fn de_gain_factor(k: usize, ch: &Channel<'_>, de: &Decorrelator) -> Result<f64> {
    require_noise(ch)?;
    let h = ch.gains[k];
    Ok(h * h / (ch.noise_power * de.norm_sq(k)))
}

fn mmse_gain_factor(k: usize, ch: &Channel<'_>) -> Result<f64> {
    let f = interference_factor(ch, others(k, ch.codes.users()))?;
    let h = ch.gains[k];
    Ok(h * h * f.inverse_quadratic_form(ch.codes.code(k)))
}

/// MMSE gain factors for a group of users that share one receiver.
///
/// Interference from everyone outside the group is folded into one factor
/// that each group member then extends with the rest of the group.
pub fn mmse_gain_factors(group: &[usize], ch: &Channel<'_>) -> Result<Vec<f64>> {
    for &k in group {
        ch.check(k)?;
    }
    let users = ch.codes.users();
    if ch.noise_power <= 0.0 {
        return group.iter().map(|&k| mmse_gain_factor(k, ch)).collect();
    }
    let outside = (0..users).filter(|j| !group.contains(j));
    let base = interference_factor(ch, outside)?;
    Ok(group
        .iter()
        .map(|&k| {
            let mut f = base.clone();
            for &j in group.iter().filter(|&&j| j != k) {
                f.add_outer(ch.received_power(j), ch.codes.code(j));
            }
            let h = ch.gains[k];
            h * h * f.inverse_quadratic_form(ch.codes.code(k))
        })
        .collect())
}

/// `g_k = γ_k / p_k`, which does not depend on `p_k`.
pub fn gain_factor(kind: ReceiverKind, k: usize, ch: &Channel<'_>) -> Result<f64> {
    gain_factor_with(kind, k, ch, None)
}

/// [`gain_factor`] reusing a precomputed decorrelator.
pub fn gain_factor_with(
    kind: ReceiverKind,
    k: usize,
    ch: &Channel<'_>,
    decorrelator: Option<&Decorrelator>,
) -> Result<f64> {
    ch.check(k)?;
    match kind {
        ReceiverKind::MatchedFilter => mf_gain_factor(k, ch),
        ReceiverKind::Decorrelator => match decorrelator {
            Some(de) => de_gain_factor(k, ch, de),
            None => de_gain_factor(k, ch, &ch.codes.decorrelator()?),
        },
        ReceiverKind::Mmse => mmse_gain_factor(k, ch),
    }
}

/// Output SINR of user `k` with receiver `kind`, via the closed forms:
/// MF `p h² / (σ² + Σ p_j h_j² ρ²)`, MMSE `p h² s_kᵀ A_k⁻¹ s_k`,
/// DE `p h² / (σ² c_kᵀc_k)`.
pub fn sinr(kind: ReceiverKind, k: usize, ch: &Channel<'_>) -> Result<f64> {
    let g = gain_factor(kind, k, ch)?;
    Ok(ch.powers[k] * g)
}

/// Receiver coefficients `c_k`.
///
/// MF returns `s_k`, DE column `k` of `S(SᵀS)⁻¹`. MMSE returns
/// `√p_k h_k / (1 + p_k h_k² s_kᵀA_k⁻¹s_k) · A_k⁻¹ s_k`; for `p_k = 0` that
/// vector vanishes, so the unscaled `A_k⁻¹ s_k` is returned instead.
pub fn receiver_filter(kind: ReceiverKind, k: usize, ch: &Channel<'_>) -> Result<LinearFilter> {
    ch.check(k)?;
    let s = ch.codes.code(k);
    let coefficients = match kind {
        ReceiverKind::MatchedFilter => s.to_vec(),
        ReceiverKind::Decorrelator => ch.codes.decorrelator()?.filter(k, ch.codes),
        ReceiverKind::Mmse => {
            let f = interference_factor(ch, others(k, ch.codes.users()))?;
            let x = f.solve(s);
            let p = ch.powers[k];
            if p > 0.0 {
                let h = ch.gains[k];
                let scale = libm::sqrt(p) * h / (1.0 + p * h * h * dot(s, &x));
                x.into_iter().map(|v| v * scale).collect()
            } else {
                x
            }
        }
    };
    Ok(LinearFilter {
        kind,
        user: k,
        coefficients,
    })
}

/// SINR of user `k` at the output of an arbitrary linear filter `c`:
/// `p_k h_k² (cᵀs_k)² / (σ² cᵀc + Σ_{j≠k} p_j h_j² (cᵀs_j)²)`.
pub fn generic_sinr(c: &[f64], k: usize, ch: &Channel<'_>) -> f64 {
    let desired = dot(c, ch.codes.code(k));
    let interference: f64 = others(k, ch.codes.users())
        .map(|j| {
            let x = dot(c, ch.codes.code(j));
            ch.received_power(j) * x * x
        })
        .sum();
    ch.received_power(k) * desired * desired / (ch.noise_power * dot(c, c) + interference)
}
