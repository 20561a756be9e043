//! The sigmoidal efficiency function `f(γ) = (1 − e^{−γ})^M` and the
//! single-user first-order condition built on it.
//!
//! With `γ = p·g`, maximizing `f(p·g)/(p + q)` over `p` gives
//! `f′(γ)(γ + q·g) = f(γ)`. For this `f`, `f′/f = M/(e^γ − 1)`, so the
//! condition is equivalent to `e^γ − 1 = M(γ + q·g)`, i.e.
//! `γ = ln(1 + M(γ + q·g))`. The root is unique above the inflection point
//! `γ₀ = ln M` and grows with `q·g`; at `q·g = 0` it is the root of
//! `γ f′(γ) = f(γ)`.

use crate::error::{Error, Result};

/// Root-finder tolerance on γ (absolute).
pub const SINR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyFunction {
    exponent: u32,
}

impl EfficiencyFunction {
    /// `exponent` is M; at least 2 so that f has an inflection point.
    pub fn new(exponent: u32) -> Result<Self> {
        if exponent < 2 {
            return Err(Error::InvalidArgument("efficiency exponent must be at least 2"));
        }
        Ok(EfficiencyFunction { exponent })
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    fn m(&self) -> f64 {
        self.exponent as f64
    }

    /// `f(γ)`; NaN for negative γ.
    pub fn value(&self, gamma: f64) -> f64 {
        // (1 − e^{−γ})^M = exp(M·ln(1 − e^{−γ}))
        libm::exp(self.m() * libm::log1p(-libm::exp(-gamma)))
    }

    /// `f′(γ) = M e^{−γ} (1 − e^{−γ})^{M−1}`.
    pub fn derivative(&self, gamma: f64) -> f64 {
        let e = libm::exp(-gamma);
        self.m() * e * libm::exp((self.m() - 1.0) * libm::log1p(-e))
    }

    /// `f″(γ) = M e^{−γ} (1 − e^{−γ})^{M−2} (M e^{−γ} − 1)`.
    pub fn second_derivative(&self, gamma: f64) -> f64 {
        let e = libm::exp(-gamma);
        let m = self.m();
        m * e * libm::exp((m - 2.0) * libm::log1p(-e)) * (m * e - 1.0)
    }

    /// Inflection point `γ₀ = ln M`.
    pub fn inflection_point(&self) -> f64 {
        libm::log(self.m())
    }

    /// Checked `f(γ)`.
    pub fn try_value(&self, gamma: f64) -> Result<f64> {
        check_sinr(gamma)?;
        Ok(self.value(gamma))
    }

    /// Checked `f′(γ)`.
    pub fn try_derivative(&self, gamma: f64) -> Result<f64> {
        check_sinr(gamma)?;
        Ok(self.derivative(gamma))
    }

    /// Residual `f′(γ)(γ + c) − f(γ)` of the first-order condition.
    pub fn foc_residual(&self, gamma: f64, c: f64) -> f64 {
        self.derivative(gamma) * (gamma + c) - self.value(gamma)
    }

    /// The SINR a user with gain factor `g` and operating power `q` targets;
    /// see the module docs. Depends on `g` and `q` only through `q·g`.
    ///
    /// Bisection on `[γ₀, γ_hi]`, doubling `γ_hi` until the sign changes,
    /// then a Newton polish.
    pub fn target_sinr(&self, g: f64, q: f64) -> Result<f64> {
        if !(g > 0.0) || !(q >= 0.0) {
            return Err(Error::InvalidArgument("need g > 0 and q ≥ 0"));
        }
        let c = q * g;
        let m = self.m();
        let gamma0 = self.inflection_point();
        if !c.is_finite() {
            return Err(Error::NumericFailure {
                lo: gamma0,
                hi: f64::INFINITY,
            });
        }
        // Same sign as e^γ − 1 − M(γ + c), strictly increasing above γ₀.
        let psi = |gamma: f64| gamma - libm::log1p(m * (gamma + c));
        let dpsi = |gamma: f64| 1.0 - m / (1.0 + m * (gamma + c));

        let mut lo = gamma0;
        let mut hi = 2.0 * gamma0.max(1.0);
        while psi(hi) <= 0.0 {
            lo = hi;
            hi *= 2.0;
            if !(hi < 1e6) {
                return Err(Error::NumericFailure { lo, hi });
            }
        }
        if !(psi(lo) < 0.0) {
            return Err(Error::NumericFailure { lo, hi });
        }
        while hi - lo > SINR_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if psi(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut gamma = 0.5 * (lo + hi);
        for _ in 0..4 {
            let next = gamma - psi(gamma) / dpsi(gamma);
            if !(next >= lo && next <= hi) {
                break;
            }
            let done = libm::fabs(next - gamma) <= 4.0 * f64::EPSILON * gamma;
            gamma = next;
            if done {
                break;
            }
        }
        Ok(gamma)
    }
}

fn check_sinr(gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("SINR must be non-negative"))
    }
}

/// Checked `f(γ)` for exponent M.
pub fn efficiency(exponent: u32, gamma: f64) -> Result<f64> {
    EfficiencyFunction::new(exponent)?.try_value(gamma)
}

/// Checked `f′(γ)` for exponent M.
pub fn efficiency_derivative(exponent: u32, gamma: f64) -> Result<f64> {
    EfficiencyFunction::new(exponent)?.try_derivative(gamma)
}

/// Target SINR γ* for gain factor `g`, operating power `q` and exponent M.
pub fn solve_target_sinr(g: f64, q: f64, exponent: u32) -> Result<f64> {
    EfficiencyFunction::new(exponent)?.target_sinr(g, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain bisection on `γ f′(γ) − f(γ)` from the definitions, q = 0.
    fn bisect_zero_q_root(m: f64) -> f64 {
        let f = |g: f64| (1.0 - (-g).exp()).powf(m);
        let df = |g: f64| m * (-g).exp() * (1.0 - (-g).exp()).powf(m - 1.0);
        let h = |g: f64| g * df(g) - f(g);
        let (mut lo, mut hi) = (m.ln(), 20.0);
        assert!(h(lo) > 0.0 && h(hi) < 0.0);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn endpoints() {
        let f = EfficiencyFunction::new(100).unwrap();
        assert_eq!(f.value(0.0), 0.0);
        assert_eq!(f.derivative(0.0), 0.0);
        assert!((f.value(60.0) - 1.0).abs() < 1e-15);
        assert!(f.try_value(-1.0).is_err());
        assert!(efficiency_derivative(100, -0.5).is_err());
        assert!(EfficiencyFunction::new(1).is_err());
    }

    #[test]
    fn value_at_reference_sinr() {
        let f = EfficiencyFunction::new(100).unwrap();
        let direct = (1.0 - (-6.48f64).exp()).powi(100);
        assert!((f.value(6.48) - direct).abs() < 1e-13);
        // high-precision reference
        assert!((f.value(6.48) - 0.857_701_778_764_100_6).abs() < 1e-14);
    }

    #[test]
    fn inflection_point_is_ln_m() {
        let f = EfficiencyFunction::new(100).unwrap();
        let g0 = f.inflection_point();
        assert!((g0 - 100f64.ln()).abs() < 1e-15);
        assert!(f.second_derivative(g0 - 1e-3) > 0.0);
        assert!(f.second_derivative(g0 + 1e-3) < 0.0);
    }

    #[test]
    fn zero_q_target_matches_bisection() {
        let oracle = bisect_zero_q_root(100.0);
        let gamma = solve_target_sinr(1.0, 0.0, 100).unwrap();
        assert!((gamma - oracle).abs() < 1e-9, "{gamma} vs {oracle}");
        // 50-digit root of e^γ − 1 = 100γ
        assert!((gamma - 6.474_600_379_589_358).abs() < 1e-9);
        assert!(gamma > 100f64.ln());
    }

    #[test]
    fn target_grows_with_q() {
        let base = solve_target_sinr(1.0, 0.0, 100).unwrap();
        let more = solve_target_sinr(1.0, 1.0, 100).unwrap();
        assert!(more > base);
        let f = EfficiencyFunction::new(100).unwrap();
        assert!(f.foc_residual(more, 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(solve_target_sinr(0.0, 1.0, 100).is_err());
        assert!(solve_target_sinr(1.0, -1.0, 100).is_err());
        assert!(matches!(
            solve_target_sinr(f64::MAX, f64::MAX, 100),
            Err(Error::NumericFailure { .. })
        ));
    }
}
