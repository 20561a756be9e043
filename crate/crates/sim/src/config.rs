//! TOML configuration mirroring the command-line flags.
//!
//! Precedence, highest first: flags, config file, the output-directory
//! environment variable (output directory only), built-in defaults.

use std::path::{Path, PathBuf};

use powergame_core::ReceiverKind;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, Error, Result};
use crate::spec::{ExperimentSpec, TraceSpec};

/// Default output directory when neither a flag nor the config file sets one.
pub const OUT_DIR_ENV: &str = "POWERGAME_OUT_DIR";

/// Every field is optional; keys use the flag names without the dashes in front.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub load_grid: Option<Vec<f64>>,
    pub q_grid: Option<Vec<f64>>,
    pub receivers: Option<Vec<ReceiverKind>>,
    pub realizations: Option<usize>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub trace: Option<TraceSpec>,
    pub replay: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub pmax: Option<f64>,
}

/// Everything a run of the binary needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub spec: ExperimentSpec,
    pub trace: Option<TraceSpec>,
    /// Realization file to trace instead of generating one from the seed.
    pub replay: Option<PathBuf>,
}

impl FileConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| Error::Config {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields serialize to TOML")
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: FileConfig) -> FileConfig {
        FileConfig {
            load_grid: self.load_grid.or(base.load_grid),
            q_grid: self.q_grid.or(base.q_grid),
            receivers: self.receivers.or(base.receivers),
            realizations: self.realizations.or(base.realizations),
            seed: self.seed.or(base.seed),
            n: self.n.or(base.n),
            out_dir: self.out_dir.or(base.out_dir),
            trace: self.trace.or(base.trace),
            replay: self.replay.or(base.replay),
            tol: self.tol.or(base.tol),
            max_iter: self.max_iter.or(base.max_iter),
            pmax: self.pmax.or(base.pmax),
        }
    }

    /// Fills unset fields from `env_out_dir` and the defaults, then validates.
    pub fn resolve(self, env_out_dir: Option<PathBuf>) -> Result<Settings> {
        let d = ExperimentSpec::default();
        let spec = ExperimentSpec {
            load_grid: self.load_grid.unwrap_or(d.load_grid),
            q_grid: self.q_grid.unwrap_or(d.q_grid),
            receivers: self.receivers.unwrap_or(d.receivers),
            realizations: self.realizations.unwrap_or(d.realizations),
            seed: self.seed.unwrap_or(d.seed),
            n: self.n.unwrap_or(d.n),
            tol: self.tol.unwrap_or(d.tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            pmax: self.pmax.unwrap_or(d.pmax),
            noise_power: d.noise_power,
            out_dir: self.out_dir.or(env_out_dir).unwrap_or(d.out_dir),
        };
        spec.validate()?;
        if self.replay.is_some() && self.trace.is_none() {
            return Err(Error::InvalidSpec("replay needs a trace to run".into()));
        }
        Ok(Settings {
            spec,
            trace: self.trace,
            replay: self.replay,
        })
    }
}

impl Settings {
    /// The resolved settings as a config file that reproduces them.
    pub fn to_file_config(&self) -> FileConfig {
        let s = &self.spec;
        FileConfig {
            load_grid: Some(s.load_grid.clone()),
            q_grid: Some(s.q_grid.clone()),
            receivers: Some(s.receivers.clone()),
            realizations: Some(s.realizations),
            seed: Some(s.seed),
            n: Some(s.n),
            out_dir: Some(s.out_dir.clone()),
            trace: self.trace,
            replay: self.replay.clone(),
            tol: Some(s.tol),
            max_iter: Some(s.max_iter),
            pmax: Some(s.pmax),
        }
    }
}
