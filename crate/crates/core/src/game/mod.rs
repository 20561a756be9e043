//! Per-user optimization: utility, best-response power for a fixed
//! receiver, and the joint (receiver, power) best response.

mod efficiency;

use alloc::vec;
use alloc::vec::Vec;

pub use efficiency::{
    efficiency, efficiency_derivative, solve_target_sinr, EfficiencyFunction, SINR_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::receivers::{
    gain_factor_with, mmse_gain_factors, Channel, CodeBook, Decorrelator, ReceiverKind,
    ReceiverSet,
};
use crate::scenario::{GameConfig, Scenario};

/// Relative tolerance under which two receivers' utilities count as tied.
pub const RECEIVER_TIE_TOLERANCE: f64 = 1e-12;

/// A user's action: transmit power and receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Strategy {
    pub power: f64,
    pub receiver: ReceiverKind,
}

/// `u = (L/M)·R·f(γ)/(p + q)`, bits per joule.
pub fn utility(config: &GameConfig, gamma: f64, power: f64, operating_power: f64) -> Result<f64> {
    let total = power + operating_power;
    if !(total > 0.0) {
        return Err(Error::UndefinedUtility);
    }
    let f = EfficiencyFunction::new(config.efficiency_exponent)?.try_value(gamma)?;
    Ok(config.throughput_scale() * f / total)
}

/// Outcome of one user's best response for one receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    pub strategy: Strategy,
    /// `g_k(p_{−k})`, 1/W.
    pub gain_factor: f64,
    /// Unclamped optimum γ*.
    pub target_sinr: f64,
    /// SINR actually reached, `power · gain_factor`.
    pub sinr: f64,
    pub utility: f64,
    /// The unconstrained optimum exceeded P_max.
    pub clamped: bool,
}

/// A scenario, its codes and the game parameters, with the per-run caches
/// (decorrelator factor, users grouped by receiver).
#[derive(Debug, Clone)]
pub struct Game<'a> {
    scenario: &'a Scenario,
    codes: &'a CodeBook,
    config: &'a GameConfig,
    efficiency: EfficiencyFunction,
    decorrelator: Option<Decorrelator>,
    groups: Vec<Vec<usize>>,
}

impl<'a> Game<'a> {
    pub fn new(scenario: &'a Scenario, codes: &'a CodeBook, config: &'a GameConfig) -> Result<Self> {
        config.validate()?;
        let users = config.users;
        if scenario.users() != users || codes.users() != users {
            return Err(Error::InvalidArgument("scenario, codes and config disagree on K"));
        }
        if codes.chips() != config.processing_gain {
            return Err(Error::InvalidArgument("code length differs from N"));
        }
        let mut groups = vec![Vec::new(); users + 1];
        for k in 0..users {
            groups[scenario.next_hop[k].receiver_index(users)].push(k);
        }
        groups.retain(|g| !g.is_empty());
        Ok(Game {
            scenario,
            codes,
            config,
            efficiency: EfficiencyFunction::new(config.efficiency_exponent)?,
            decorrelator: codes.decorrelator().ok(),
            groups,
        })
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn codes(&self) -> &'a CodeBook {
        self.codes
    }

    pub fn config(&self) -> &'a GameConfig {
        self.config
    }

    pub fn users(&self) -> usize {
        self.config.users
    }

    pub fn efficiency(&self) -> EfficiencyFunction {
        self.efficiency
    }

    pub fn is_available(&self, kind: ReceiverKind) -> bool {
        kind != ReceiverKind::Decorrelator || self.decorrelator.is_some()
    }

    fn require(&self, kind: ReceiverKind) -> Result<()> {
        if self.is_available(kind) {
            Ok(())
        } else {
            Err(Error::ReceiverUnavailable(kind))
        }
    }

    /// User `k`'s view of the channel at its next hop.
    pub fn channel<'p>(&self, k: usize, powers: &'p [f64]) -> Channel<'p>
    where
        'a: 'p,
    {
        Channel {
            codes: self.codes,
            powers,
            gains: self.scenario.gain_row(k),
            noise_power: self.scenario.noise_power,
        }
    }

    fn check_powers(&self, powers: &[f64]) -> Result<()> {
        if powers.len() != self.users() {
            return Err(Error::InvalidArgument("power vector must have K entries"));
        }
        Ok(())
    }

    pub fn gain_factor(&self, kind: ReceiverKind, k: usize, powers: &[f64]) -> Result<f64> {
        self.require(kind)?;
        self.check_powers(powers)?;
        let ch = self.channel(k, powers);
        gain_factor_with(kind, k, &ch, self.decorrelator.as_ref())
    }

    /// Gain factors of every user under a common receiver type.
    pub fn gain_factors(&self, kind: ReceiverKind, powers: &[f64]) -> Result<Vec<f64>> {
        self.require(kind)?;
        self.check_powers(powers)?;
        if kind != ReceiverKind::Mmse {
            return (0..self.users())
                .map(|k| self.gain_factor(kind, k, powers))
                .collect();
        }
        let mut out = vec![0.0; self.users()];
        for group in &self.groups {
            let ch = self.channel(group[0], powers);
            for (&k, g) in group.iter().zip(mmse_gain_factors(group, &ch)?) {
                out[k] = g;
            }
        }
        Ok(out)
    }

    pub fn sinr(&self, kind: ReceiverKind, k: usize, powers: &[f64]) -> Result<f64> {
        Ok(powers[k] * self.gain_factor(kind, k, powers)?)
    }

    /// SINR of every user under its own receiver.
    pub fn sinrs(&self, receivers: &[ReceiverKind], powers: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.users()];
        for kind in ReceiverSet::all().iter() {
            if !receivers.contains(&kind) {
                continue;
            }
            let g = self.gain_factors(kind, powers)?;
            for k in 0..self.users() {
                if receivers[k] == kind {
                    out[k] = powers[k] * g[k];
                }
            }
        }
        Ok(out)
    }

    /// Utility of user `k` at SINR `gamma` and power `power` with receiver `kind`.
    pub fn utility(&self, k: usize, kind: ReceiverKind, gamma: f64, power: f64) -> Result<f64> {
        let total = power + self.config.operating_power(k, kind);
        if !(total > 0.0) {
            return Err(Error::UndefinedUtility);
        }
        Ok(self.config.throughput_scale() * self.efficiency.try_value(gamma)? / total)
    }

    /// Utility of every user at `powers` with receivers `receivers`.
    pub fn utilities(&self, receivers: &[ReceiverKind], powers: &[f64]) -> Result<Vec<f64>> {
        let gammas = self.sinrs(receivers, powers)?;
        (0..self.users())
            .map(|k| self.utility(k, receivers[k], gammas[k], powers[k]))
            .collect()
    }

    /// Best response of user `k` for receiver `kind` given its gain factor.
    pub fn best_response_from_gain(
        &self,
        k: usize,
        kind: ReceiverKind,
        gain_factor: f64,
    ) -> Result<BestResponse> {
        if !(gain_factor > 0.0) {
            return Err(Error::NoViableTransmission { user: k });
        }
        let q = self.config.operating_power(k, kind);
        let target = self.efficiency.target_sinr(gain_factor, q)?;
        let unclamped = target / gain_factor;
        let clamped = unclamped > self.config.max_power;
        let power = if clamped { self.config.max_power } else { unclamped };
        let sinr = if clamped { power * gain_factor } else { target };
        Ok(BestResponse {
            strategy: Strategy {
                power,
                receiver: kind,
            },
            gain_factor,
            target_sinr: target,
            sinr,
            utility: self.utility(k, kind, sinr, power)?,
            clamped,
        })
    }

    /// `p̃_k = min(γ*/g_k, P_max)` for receiver `kind`, others' powers fixed.
    pub fn best_response_power(
        &self,
        k: usize,
        kind: ReceiverKind,
        powers: &[f64],
    ) -> Result<BestResponse> {
        let g = self.gain_factor(kind, k, powers)?;
        self.best_response_from_gain(k, kind, g)
    }

    /// Joint best response over the receivers in `allowed`: the power is
    /// optimized per receiver and the receiver with the highest resulting
    /// utility wins, ties going to MMSE, then DE, then MF.
    /// An unavailable decorrelator is skipped.
    pub fn best_response_strategy(
        &self,
        k: usize,
        powers: &[f64],
        allowed: ReceiverSet,
    ) -> Result<BestResponse> {
        let candidates = allowed.iter().filter(|&kind| self.is_available(kind)).map(|kind| {
            self.best_response_power(k, kind, powers)
        });
        pick_best(candidates)?.ok_or(Error::ReceiverUnavailable(ReceiverKind::Decorrelator))
    }
}

/// First strictly better candidate wins; candidates arrive in preference order.
pub(crate) fn pick_best(candidates: impl Iterator<Item = Result<BestResponse>>) -> Result<Option<BestResponse>> {
    let mut best: Option<BestResponse> = None;
    for c in candidates {
        let c = c?;
        match &best {
            Some(b) if c.utility <= b.utility * (1.0 + RECEIVER_TIE_TOLERANCE) => {}
            _ => best = Some(c),
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Hop, Point};

    /// One user, one hop to the AP with amplitude gain `h`.
    fn single_link(h: f64, noise: f64) -> (Scenario, CodeBook) {
        let scenario = Scenario {
            positions: vec![Point::new(1.0, 0.0)],
            access_point: Point::new(0.0, 0.0),
            next_hop: vec![Hop::AccessPoint],
            gains: vec![vec![0.0], vec![h]],
            noise_power: noise,
            seed: 0,
        };
        (scenario, CodeBook::generate(1, 4, 0).unwrap())
    }

    fn config(q: f64, pmax: f64) -> GameConfig {
        let mut c = GameConfig::reference(1, 4, q);
        c.max_power = pmax;
        c
    }

    #[test]
    fn utility_basics() {
        let c = config(0.5, 10.0);
        assert_eq!(utility(&c, 0.0, 1.0, 0.5).unwrap(), 0.0);
        let u = utility(&c, 50.0, 0.5, 0.5).unwrap();
        assert!((u - 1e5).abs() < 1e-6);
        let half = utility(&c, 50.0, 1.5, 0.5).unwrap();
        assert!((half - u / 2.0).abs() < 1e-9);
        assert_eq!(utility(&c, 1.0, 0.0, 0.0), Err(Error::UndefinedUtility));
    }

    #[test]
    fn unit_gain_best_response() {
        let (s, codes) = single_link(1.0, 1.0);
        let cfg = config(0.0, f64::INFINITY);
        let game = Game::new(&s, &codes, &cfg).unwrap();
        let br = game
            .best_response_power(0, ReceiverKind::MatchedFilter, &[0.0])
            .unwrap();
        assert!((br.strategy.power - 6.474_600_379_589_358).abs() < 1e-9);
        assert!(!br.clamped);
    }

    #[test]
    fn clamps_at_max_power() {
        let (s, codes) = single_link(1.0, 1.0);
        let cfg = config(0.0, 2.0);
        let game = Game::new(&s, &codes, &cfg).unwrap();
        let br = game.best_response_power(0, ReceiverKind::Mmse, &[0.0]).unwrap();
        assert_eq!(br.strategy.power, 2.0);
        assert!(br.clamped);
        assert!((br.sinr - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gain_is_not_viable() {
        let (mut s, codes) = single_link(1.0, 1.0);
        s.gains[1][0] = 0.0;
        let cfg = config(0.01, 1.0);
        let game = Game::new(&s, &codes, &cfg).unwrap();
        assert_eq!(
            game.best_response_power(0, ReceiverKind::MatchedFilter, &[0.0]),
            Err(Error::NoViableTransmission { user: 0 })
        );
    }

    #[test]
    fn single_user_tie_goes_to_mmse() {
        let (s, codes) = single_link(1e-3, 5e-16);
        let cfg = config(0.01, 100.0);
        let game = Game::new(&s, &codes, &cfg).unwrap();
        let br = game.best_response_strategy(0, &[0.0], ReceiverSet::all()).unwrap();
        assert_eq!(br.strategy.receiver, ReceiverKind::Mmse);
        let only_de = ReceiverSet::from_kinds(&[ReceiverKind::Decorrelator, ReceiverKind::MatchedFilter]).unwrap();
        let br = game.best_response_strategy(0, &[0.0], only_de).unwrap();
        assert_eq!(br.strategy.receiver, ReceiverKind::Decorrelator);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let (s, codes) = single_link(1.0, 1.0);
        let cfg = GameConfig::reference(2, 4, 0.0);
        assert!(Game::new(&s, &codes, &cfg).is_err());
        let cfg = GameConfig::reference(1, 8, 0.0);
        assert!(Game::new(&s, &codes, &cfg).is_err());
    }
}
