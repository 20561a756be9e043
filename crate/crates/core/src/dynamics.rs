//! Synchronous best-response dynamics `p(t) = p̃(p(t−1))`, equilibrium
//! checks and the Pareto probe.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{pick_best, BestResponse, Game};
use crate::receivers::{ReceiverKind, ReceiverSet};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 500;
/// Default starting power as a fraction of P_max. It sits below every
/// equilibrium power at the reference parameters, so powers ramp up.
pub const DEFAULT_INITIAL_FRACTION: f64 = 1e-9;
/// Consecutive clamped best responses after which a run is power-limited.
pub const POWER_LIMITED_RUN: usize = 50;
pub const DEFAULT_PARETO_SCALE: f64 = 0.99;
/// Log-grid density used by [`verify_equilibrium`].
pub const GRID_POINTS_PER_DECADE: usize = 32;
/// Decades below P_max covered by the deviation grid.
pub const GRID_DECADES: usize = 18;

/// How users pick receivers: one type imposed on everybody, or each user
/// choosing from a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverPolicy {
    Fixed(ReceiverKind),
    Free(ReceiverSet),
}

impl ReceiverPolicy {
    pub fn allowed(self) -> ReceiverSet {
        match self {
            ReceiverPolicy::Fixed(kind) => ReceiverSet::only(kind),
            ReceiverPolicy::Free(set) => set,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsOptions {
    /// Stop once `max_k |p̃_k(p) − p_k| / p_k` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting powers; `None` means `10⁻⁹·P_max` for everyone.
    pub initial: Option<Vec<f64>>,
    /// Scale for the Pareto probe run on converged profiles; `None` skips it.
    pub pareto_scale: Option<f64>,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        DynamicsOptions {
            tol: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITERATIONS,
            initial: None,
            pareto_scale: Some(DEFAULT_PARETO_SCALE),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerProfile {
    pub powers: Vec<f64>,
    pub receivers: Vec<ReceiverKind>,
}

impl PowerProfile {
    pub fn uniform(users: usize, power: f64, receiver: ReceiverKind) -> Self {
        PowerProfile {
            powers: vec![power; users],
            receivers: vec![receiver; users],
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        PowerProfile {
            powers: self.powers.iter().map(|p| p * alpha).collect(),
            receivers: self.receivers.clone(),
        }
    }
}

/// State at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub profile: PowerProfile,
    pub sinr: Vec<f64>,
    pub utility: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoProbe {
    pub scale: f64,
    /// Every user's utility strictly increased.
    pub all_improved: bool,
    /// At least one user's utility strictly increased.
    pub any_improved: bool,
    /// `u_k(α·p) − u_k(p)`.
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub trajectory: Vec<IterationRecord>,
    pub converged: bool,
    /// Index of the last profile in the trajectory.
    pub iterations: usize,
    /// `max_k |p̃_k(p′) − p′_k| / p′_k` at the last profile.
    pub fixed_point_residual: f64,
    /// Some best response sat at P_max for more than
    /// [`POWER_LIMITED_RUN`] consecutive iterations, or the run converged
    /// with clamped users.
    pub power_limited: bool,
    /// Users whose best response at the last profile is clamped.
    pub clamped_users: usize,
    pub pareto_probe: Option<ParetoProbe>,
}

impl EquilibriumReport {
    pub fn last(&self) -> &IterationRecord {
        self.trajectory.last().expect("trajectory holds at least t = 0")
    }

    pub fn equilibrium(&self) -> &PowerProfile {
        &self.last().profile
    }

    pub fn mean_utility(&self) -> f64 {
        mean(&self.last().utility)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Log-uniform random powers on `[10⁻¹⁵·P_max, P_max]`, reproducible from `seed`.
pub fn random_initial_powers(users: usize, max_power: f64, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = crate::rng::stream(seed, crate::rng::STREAM_INIT_POWER);
    (0..users)
        .map(|_| max_power * libm::pow(10.0, -15.0 * rng.random::<f64>()))
        .collect()
}

fn relative_change(next: &[f64], current: &[f64]) -> f64 {
    next.iter()
        .zip(current)
        .map(|(&n, &c)| {
            if c > 0.0 {
                libm::fabs(n - c) / c
            } else if n == c {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Gain factors under every available receiver in `allowed`, plus best
/// responses derived from them.
struct Evaluation {
    kinds: Vec<ReceiverKind>,
    gains: Vec<Vec<f64>>,
    responses: Vec<BestResponse>,
}

impl Evaluation {
    fn new(game: &Game<'_>, powers: &[f64], allowed: ReceiverSet) -> Result<Self> {
        let kinds: Vec<ReceiverKind> = allowed.iter().filter(|&k| game.is_available(k)).collect();
        if kinds.is_empty() {
            return Err(Error::ReceiverUnavailable(ReceiverKind::Decorrelator));
        }
        let gains = kinds
            .iter()
            .map(|&kind| game.gain_factors(kind, powers))
            .collect::<Result<Vec<_>>>()?;
        let responses = (0..game.users())
            .map(|k| {
                let candidates = kinds
                    .iter()
                    .zip(&gains)
                    .map(|(&kind, g)| game.best_response_from_gain(k, kind, g[k]));
                Ok(pick_best(candidates)?.expect("nonempty candidate list"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Evaluation {
            kinds,
            gains,
            responses,
        })
    }

    fn record(&self, game: &Game<'_>, t: usize, profile: PowerProfile) -> Result<IterationRecord> {
        let mut sinr = Vec::with_capacity(profile.powers.len());
        let mut utility = Vec::with_capacity(profile.powers.len());
        for (k, (&p, &kind)) in profile.powers.iter().zip(&profile.receivers).enumerate() {
            let idx = self
                .kinds
                .iter()
                .position(|&x| x == kind)
                .ok_or(Error::ReceiverUnavailable(kind))?;
            let gamma = p * self.gains[idx][k];
            sinr.push(gamma);
            utility.push(game.utility(k, kind, gamma, p)?);
        }
        Ok(IterationRecord {
            t,
            profile,
            sinr,
            utility,
        })
    }

    fn next_profile(&self) -> PowerProfile {
        PowerProfile {
            powers: self.responses.iter().map(|b| b.strategy.power).collect(),
            receivers: self.responses.iter().map(|b| b.strategy.receiver).collect(),
        }
    }
}

/// Runs `p(t) = p̃(p(t−1))` with all users updating simultaneously.
///
/// At each step the best response to the current profile is computed; if it
/// is within `tol` (relative) of the current profile the run has converged
/// and the best response is not appended. Hitting `max_iter` yields a
/// report with `converged = false`.
pub fn run_best_response_dynamics(
    game: &Game<'_>,
    policy: ReceiverPolicy,
    options: &DynamicsOptions,
) -> Result<EquilibriumReport> {
    let users = game.users();
    let cfg = game.config();
    if !(options.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive"));
    }
    let allowed = policy.allowed();
    if let ReceiverPolicy::Fixed(kind) = policy {
        if !game.is_available(kind) {
            return Err(Error::ReceiverUnavailable(kind));
        }
    }
    let powers = match &options.initial {
        Some(p) => {
            if p.len() != users {
                return Err(Error::InvalidArgument("initial power vector must have K entries"));
            }
            if p.iter().any(|&x| !(x >= 0.0 && x <= cfg.max_power)) {
                return Err(Error::InvalidArgument("initial powers must lie in [0, P_max]"));
            }
            p.clone()
        }
        None => vec![DEFAULT_INITIAL_FRACTION * cfg.max_power; users],
    };
    let first = allowed
        .iter()
        .find(|&k| game.is_available(k))
        .ok_or(Error::ReceiverUnavailable(ReceiverKind::Decorrelator))?;
    let mut profile = PowerProfile {
        powers,
        receivers: vec![first; users],
    };

    let mut eval = Evaluation::new(game, &profile.powers, allowed)?;
    let mut trajectory = vec![eval.record(game, 0, profile.clone())?];
    let mut clamp_runs = vec![0usize; users];
    let mut longest_clamp_run = 0;
    let mut t = 0;
    let mut residual;
    let mut settled;
    loop {
        for (run, br) in clamp_runs.iter_mut().zip(&eval.responses) {
            *run = if br.clamped { *run + 1 } else { 0 };
            longest_clamp_run = longest_clamp_run.max(*run);
        }
        let next = eval.next_profile();
        residual = relative_change(&next.powers, &profile.powers);
        settled = next.receivers == profile.receivers;
        if residual < options.tol && settled {
            break;
        }
        if t == options.max_iter {
            break;
        }
        t += 1;
        profile = next;
        eval = Evaluation::new(game, &profile.powers, allowed)?;
        trajectory.push(eval.record(game, t, profile.clone())?);
    }
    let converged = residual < options.tol && settled;
    let clamped_users = eval.responses.iter().filter(|b| b.clamped).count();
    let pareto_probe = match options.pareto_scale {
        Some(alpha) if converged => Some(pareto_probe(game, &profile, alpha)?),
        _ => None,
    };
    Ok(EquilibriumReport {
        trajectory,
        converged,
        iterations: t,
        fixed_point_residual: residual,
        power_limited: longest_clamp_run > POWER_LIMITED_RUN || (converged && clamped_users > 0),
        clamped_users,
        pareto_probe,
    })
}

/// Unilateral-deviation check of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCheck {
    /// Per user `|p̃_k − p_k| / p_k` against the joint best response.
    pub power_deviation: Vec<f64>,
    /// Per user best relative utility gain found on the deviation grid,
    /// over every allowed receiver; ≤ 0 means no profitable deviation.
    pub utility_gain: Vec<f64>,
    /// Every user's best-response receiver equals the one it uses.
    pub receivers_consistent: bool,
    pub grid_points: usize,
}

impl EquilibriumCheck {
    pub fn max_power_deviation(&self) -> f64 {
        self.power_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_utility_gain(&self) -> f64 {
        self.utility_gain.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Recomputes each user's best response with the others held fixed and
/// searches a log-spaced power grid (all allowed receivers) for a better
/// unilateral deviation.
pub fn verify_equilibrium(
    game: &Game<'_>,
    profile: &PowerProfile,
    allowed: ReceiverSet,
) -> Result<EquilibriumCheck> {
    let users = game.users();
    let pmax = game.config().max_power;
    let eval = Evaluation::new(game, &profile.powers, allowed)?;
    let current = eval.record(game, 0, profile.clone())?;
    let points = GRID_POINTS_PER_DECADE * GRID_DECADES + 1;
    let grid: Vec<f64> = (0..points)
        .map(|i| {
            let exponent = -(GRID_DECADES as f64) + i as f64 / GRID_POINTS_PER_DECADE as f64;
            pmax * libm::pow(10.0, exponent)
        })
        .collect();

    let mut power_deviation = Vec::with_capacity(users);
    let mut utility_gain = Vec::with_capacity(users);
    let mut receivers_consistent = true;
    for k in 0..users {
        let p = profile.powers[k];
        let br = &eval.responses[k];
        power_deviation.push(relative_change(&[br.strategy.power], &[p]));
        receivers_consistent &= br.strategy.receiver == profile.receivers[k];
        let u_now = current.utility[k];
        let mut best = f64::NEG_INFINITY;
        for (&kind, g) in eval.kinds.iter().zip(&eval.gains) {
            for &x in &grid {
                let u = game.utility(k, kind, x * g[k], x)?;
                best = best.max(u);
            }
        }
        utility_gain.push(if u_now > 0.0 {
            (best - u_now) / u_now
        } else if best > 0.0 {
            f64::INFINITY
        } else {
            0.0
        });
    }
    Ok(EquilibriumCheck {
        power_deviation,
        utility_gain,
        receivers_consistent,
        grid_points: points,
    })
}

/// Utilities after every user scales its power by `alpha` (receivers kept).
pub fn pareto_probe(game: &Game<'_>, profile: &PowerProfile, alpha: f64) -> Result<ParetoProbe> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument("scale must lie in (0, 1)"));
    }
    let before = game.utilities(&profile.receivers, &profile.powers)?;
    let scaled = profile.scaled(alpha);
    let after = game.utilities(&scaled.receivers, &scaled.powers)?;
    let deltas: Vec<f64> = after.iter().zip(&before).map(|(a, b)| a - b).collect();
    Ok(ParetoProbe {
        scale: alpha,
        all_improved: after.iter().zip(&before).all(|(a, b)| a > b),
        any_improved: after.iter().zip(&before).any(|(a, b)| a > b),
        deltas,
    })
}
