use crate::error::Result;
use crate::receivers::CodeBook;
use crate::scenario::Scenario;

/// A scenario with its spreading codes, both derived from one seed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Realization {
    pub scenario: Scenario,
    pub codes: CodeBook,
    /// Code draws needed to get an invertible code Gram matrix (1 if none were rejected).
    pub code_draws: u32,
}

impl Realization {
    /// When `users ≤ chips` the codes are redrawn until the decorrelator exists.
    pub fn generate(users: usize, chips: usize, seed: u64, noise_power: f64) -> Result<Self> {
        let scenario = Scenario::generate(users, seed, noise_power)?;
        let (codes, code_draws) = CodeBook::generate_decorrelatable(users, chips, seed)?;
        Ok(Realization {
            scenario,
            codes,
            code_draws,
        })
    }
}
