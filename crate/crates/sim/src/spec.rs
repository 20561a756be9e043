use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use powergame_core::dynamics::{DEFAULT_MAX_ITERATIONS, DEFAULT_PARETO_SCALE, DEFAULT_TOLERANCE};
use powergame_core::rng::derive_seed;
use powergame_core::scenario::DEFAULT_NOISE_POWER;
use powergame_core::{DynamicsOptions, GameConfig, ReceiverKind};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PROCESSING_GAIN: usize = 32;
pub const DEFAULT_REALIZATIONS: usize = 100;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MAX_POWER: f64 = 100.0;
pub const DEFAULT_OUT_DIR: &str = "results";

/// Loads 0.1, 0.2, ..., 1.5.
pub fn default_load_grid() -> Vec<f64> {
    (1..=15).map(|i| i as f64 / 10.0).collect()
}

/// 10⁻⁴ J to 1 J per 100-bit packet at 100 kb/s, expressed in watts.
pub fn default_q_grid() -> Vec<f64> {
    vec![0.1, 1.0, 10.0, 100.0, 1000.0]
}

/// One batch of experiments: every load × receiver × q, averaged over
/// seeded realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// β = K/N values.
    pub load_grid: Vec<f64>,
    /// Operating power q shared by every node, W.
    pub q_grid: Vec<f64>,
    pub receivers: Vec<ReceiverKind>,
    pub realizations: usize,
    pub seed: u64,
    /// Processing gain N.
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub pmax: f64,
    pub noise_power: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            load_grid: default_load_grid(),
            q_grid: default_q_grid(),
            receivers: ReceiverKind::PREFERENCE.to_vec(),
            realizations: DEFAULT_REALIZATIONS,
            seed: DEFAULT_SEED,
            n: DEFAULT_PROCESSING_GAIN,
            tol: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITERATIONS,
            pmax: DEFAULT_MAX_POWER,
            noise_power: DEFAULT_NOISE_POWER,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        if self.realizations == 0 {
            return bad("at least one realization is needed");
        }
        if self.n == 0 {
            return bad("processing gain must be at least 1");
        }
        if self.receivers.is_empty() {
            return bad("receiver list is empty");
        }
        if self.load_grid.is_empty() || self.q_grid.is_empty() {
            return bad("load and q grids must be non-empty");
        }
        for &beta in &self.load_grid {
            if !(beta.is_finite() && beta > 0.0) {
                return bad("loads must be positive");
            }
            if self.users_for_load(beta) == 0 {
                return Err(Error::InvalidSpec(format!("load {beta} leaves no users at N = {}", self.n)));
            }
        }
        if self.q_grid.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
            return bad("q values must be finite and non-negative");
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("need tol > 0 and max_iter ≥ 1");
        }
        if !(self.pmax > 0.0 && self.pmax.is_finite()) {
            return bad("P_max must be positive");
        }
        if !(self.noise_power > 0.0) {
            return bad("noise power must be positive");
        }
        Ok(())
    }

    /// K = round(β·N).
    pub fn users_for_load(&self, beta: f64) -> usize {
        (beta * self.n as f64).round() as usize
    }

    /// The decorrelator needs K ≤ N, so it is dropped for loads above 1.
    pub fn receivers_for_load(&self, beta: f64) -> Vec<ReceiverKind> {
        let users = self.users_for_load(beta);
        self.receivers
            .iter()
            .copied()
            .filter(|&kind| kind != ReceiverKind::Decorrelator || (beta <= 1.0 && users <= self.n))
            .collect()
    }

    /// Seed of realization `r` at `users` nodes. It does not depend on the
    /// receiver or q, so all of them see the same scenarios.
    pub fn realization_seed(&self, users: usize, r: usize) -> u64 {
        derive_seed(derive_seed(self.seed, users as u64), r as u64)
    }

    pub fn game_config(&self, users: usize, q: f64) -> GameConfig {
        GameConfig {
            max_power: self.pmax,
            ..GameConfig::reference(users, self.n, q)
        }
    }

    pub fn dynamics_options(&self) -> DynamicsOptions {
        DynamicsOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            initial: None,
            pareto_scale: Some(DEFAULT_PARETO_SCALE),
        }
    }
}

/// A single dynamics run to trace: `K,receiver,q,seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TraceSpec {
    pub users: usize,
    pub receiver: ReceiverKind,
    pub q: f64,
    pub seed: u64,
}

impl fmt::Display for TraceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.users, self.receiver, self.q, self.seed)
    }
}

impl FromStr for TraceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("trace `{s}`: expected K,receiver,q,seed"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [users, receiver, q, seed] = parts[..] else {
            return Err(bad());
        };
        let spec = TraceSpec {
            users: users.parse().map_err(|_| bad())?,
            receiver: receiver.parse()?,
            q: q.parse().map_err(|_| bad())?,
            seed: seed.parse().map_err(|_| bad())?,
        };
        if spec.users == 0 || !(spec.q.is_finite() && spec.q >= 0.0) {
            return Err(bad());
        }
        Ok(spec)
    }
}

impl TryFrom<String> for TraceSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TraceSpec> for String {
    fn from(t: TraceSpec) -> String {
        t.to_string()
    }
}
