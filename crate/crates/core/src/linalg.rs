//! Small dense kernels for N×N symmetric positive-definite systems.
//!
//! Everything here works on an upper-triangular factor `R` with `RᵀR = A`.
//! Two ways to obtain it: [`Factor::cholesky`] on an explicitly formed
//! matrix, or [`Factor::scaled_identity`] followed by rank-one
//! [`Factor::add_outer`] updates. The second never forms `A`, so the
//! rounding error stays relative to `√‖A‖` instead of `‖A‖`, which matters
//! when strong interferers sit twelve or more orders of magnitude above the
//! noise floor.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest accepted condition-number estimate for explicitly formed matrices.
pub const CONDITION_GUARD: f64 = 1e12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Upper-triangular factor stored row-major in a dense `n × n` buffer.
#[derive(Debug, Clone)]
pub struct Factor {
    n: usize,
    r: Vec<f64>,
}

impl Factor {
    /// Factor of `d·I`.
    pub fn scaled_identity(n: usize, d: f64) -> Self {
        let mut r = vec![0.0; n * n];
        let s = libm::sqrt(d);
        for i in 0..n {
            r[i * n + i] = s;
        }
        Factor { n, r }
    }

    /// Cholesky factorization of a symmetric matrix given row-major.
    ///
    /// Fails with [`Error::SingularMatrix`] on a non-positive pivot or when the
    /// pivot-ratio condition estimate exceeds [`CONDITION_GUARD`].
    pub fn cholesky(a: &[f64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut r = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut s = a[i * n + j];
                for k in 0..i {
                    s -= r[k * n + i] * r[k * n + j];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::SingularMatrix {
                            condition_estimate: f64::INFINITY,
                        });
                    }
                    r[i * n + i] = libm::sqrt(s);
                } else {
                    r[i * n + j] = s / r[i * n + i];
                }
            }
        }
        let f = Factor { n, r };
        let cond = f.condition_estimate();
        if cond > CONDITION_GUARD {
            return Err(Error::SingularMatrix {
                condition_estimate: cond,
            });
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Squared ratio of the largest to smallest diagonal entry of `R`: a
    /// cheap lower bound on `cond₂(RᵀR)`.
    pub fn condition_estimate(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..self.n {
            let d = libm::fabs(self.r[i * self.n + i]);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if lo == 0.0 {
            return f64::INFINITY;
        }
        let ratio = hi / lo;
        ratio * ratio
    }

    /// In-place update `RᵀR ← RᵀR + w·vvᵀ` with Givens rotations.
    ///
    /// Requires a nonsingular factor and `w ≥ 0`.
    pub fn add_outer(&mut self, w: f64, v: &[f64]) {
        debug_assert!(w >= 0.0);
        if w == 0.0 {
            return;
        }
        let n = self.n;
        let sw = libm::sqrt(w);
        let mut x: Vec<f64> = v.iter().map(|vi| vi * sw).collect();
        for k in 0..n {
            let rkk = self.r[k * n + k];
            let rad = libm::hypot(rkk, x[k]);
            // Orthogonal rotation; |c|, |s| ≤ 1 keeps the error relative to
            // each row even when x dwarfs the current factor.
            let c = rkk / rad;
            let s = x[k] / rad;
            self.r[k * n + k] = rad;
            for j in k + 1..n {
                let rkj = self.r[k * n + j];
                self.r[k * n + j] = c * rkj + s * x[j];
                x[j] = c * x[j] - s * rkj;
            }
        }
    }

    /// Solves `Rᵀ y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.r[k * n + i] * y[k];
            }
            y[i] = s / self.r[i * n + i];
        }
        y
    }

    /// Solves `R x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.r[i * n + k] * x[k];
            }
            x[i] = s / self.r[i * n + i];
        }
        x
    }

    /// Solves `RᵀR x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `bᵀ (RᵀR)⁻¹ b`, computed as `‖R⁻ᵀ b‖²`.
    pub fn inverse_quadratic_form(&self, b: &[f64]) -> f64 {
        let y = self.solve_lower(b);
        dot(&y, &y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(vectors: &[Vec<f64>], weights: &[f64], diag: f64, n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = diag;
        }
        for (v, w) in vectors.iter().zip(weights) {
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] += w * v[i] * v[j];
                }
            }
        }
        a
    }

    #[test]
    fn rank_one_updates_match_cholesky() {
        let n = 4;
        let vs = vec![
            vec![0.5, -0.5, 0.5, 0.5],
            vec![0.5, 0.5, -0.5, 0.5],
            vec![0.5, 0.5, 0.5, 0.5],
        ];
        let ws = [2.0, 0.3, 7.0];
        let mut f = Factor::scaled_identity(n, 0.1);
        for (v, w) in vs.iter().zip(ws) {
            f.add_outer(w, v);
        }
        let a = gram(&vs, &ws, 0.1, n);
        let chol = Factor::cholesky(&a, n).unwrap();
        for (x, y) in f.r.iter().zip(&chol.r) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        let b = [1.0, 2.0, -1.0, 0.5];
        let x = f.solve(&b);
        // A x = b
        for i in 0..n {
            let ax: f64 = (0..n).map(|j| a[i * n + j] * x[j]).sum();
            assert!((ax - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = [1.0, 1.0, 1.0, 1.0];
        assert!(matches!(
            Factor::cholesky(&a, 2),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn ill_conditioned_matrix_rejected() {
        let a = [1.0, 0.0, 0.0, 1e-14];
        match Factor::cholesky(&a, 2) {
            Err(Error::SingularMatrix { condition_estimate }) => {
                assert!((condition_estimate - 1e14).abs() < 1e2)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
