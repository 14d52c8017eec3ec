//! Distributions on the complex unit sphere `ℂS^{n−1} ⊂ ℂ^n`.
//!
//! All three densities are invariant under `z → z e^{iφ}`. Points are
//! slices of `n` complex numbers with unit norm.

mod acg;
mod bingham;
mod distribution;
mod mixture;
mod watson;

pub use acg::ComplexACG;
pub use bingham::{cb_log_norm, cb_to_real, ComplexBingham};
pub use distribution::ComplexDistribution;
pub use mixture::{ComplexWatsonMixture, EmResult};
pub use watson::{cw_log_norm, ComplexWatson};

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::Complex64;

pub const UNIT_TOL: f64 = 1e-10;

pub trait ComplexSphericalDensity: fmt::Debug + Send + Sync {
    /// Complex dimension `n`.
    fn dim(&self) -> usize;

    fn pdf(&self, z: &[Complex64]) -> f64;

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<Complex64>>;
}

pub(crate) fn unit_complex(name: &'static str, v: &[Complex64]) -> Result<DVector<Complex64>> {
    if v.is_empty() {
        return Err(Error::param(name, "needs at least one coordinate"));
    }
    if v.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::param(name, "non-finite coordinate"));
    }
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::param(name, format!("norm is {n}, not 1")));
    }
    Ok(DVector::from_column_slice(v))
}

pub(crate) fn check_point(n: usize, z: &[Complex64]) -> Result<()> {
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: z.len(),
        });
    }
    unit_complex("z", z).map(|_| ())
}

/// `|aᴴb|²`.
pub(crate) fn abs_inner_sqr(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// Standard complex Gaussian vector (`E[ggᴴ] = I`).
pub(crate) fn complex_gaussian(n: usize, rng: &mut dyn RngCore) -> DVector<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_iterator(
        n,
        (0..n).map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(s * re, s * im)
        }),
    )
}

/// Uniform draw on the complex unit sphere.
pub fn uniform_complex(n: usize, rng: &mut dyn RngCore) -> DVector<Complex64> {
    loop {
        let g = complex_gaussian(n, rng);
        let nrm = g.norm();
        if nrm > 1e-12 {
            return g.unscale(nrm);
        }
    }
}

/// Weighted scatter `Σ w_j z_j z_jᴴ / Σ w_j`.
pub fn complex_scatter(samples: &[Vec<Complex64>], weights: &[f64]) -> Result<DMatrix<Complex64>> {
    let n = samples
        .first()
        .map(|s| s.len())
        .ok_or_else(|| Error::param("samples", "need at least one"))?;
    if weights.len() != samples.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            found: weights.len(),
        });
    }
    let mut s = DMatrix::zeros(n, n);
    let mut total = 0.0;
    for (z, &w) in samples.iter().zip(weights) {
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: z.len(),
            });
        }
        let v = DVector::from_column_slice(z);
        s += (&v * v.adjoint()).scale(w);
        total += w;
    }
    if !(total > 0.0) {
        return Err(Error::param("weights", "must have positive sum"));
    }
    Ok(s.unscale(total))
}

/// Divided difference `exp[x₁,…,x_m] = Σ_k e^{x_k} / Π_{l≠k}(x_k − x_l)`.
/// Well-separated nodes use the sum directly; otherwise the value is read
/// off the matrix exponential of the bidiagonal matrix with the nodes on
/// the diagonal and ones above it, which also covers repeated nodes.
pub(crate) fn exp_divided_difference(nodes: &[f64]) -> f64 {
    let m = nodes.len();
    if m == 1 {
        return nodes[0].exp();
    }
    let hi = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    let mut gap = f64::INFINITY;
    for i in 0..m {
        for j in i + 1..m {
            gap = gap.min((nodes[i] - nodes[j]).abs());
        }
    }
    if spread > 0.0 && gap >= 0.1 * spread {
        return (0..m)
            .map(|k| {
                let p: f64 = (0..m).filter(|&l| l != k).map(|l| nodes[k] - nodes[l]).product();
                nodes[k].exp() / p
            })
            .sum();
    }
    let j = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            nodes[r]
        } else if c == r + 1 {
            1.0
        } else {
            0.0
        }
    });
    j.exp()[(0, m - 1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn divided_difference_limits() {
        // all nodes equal: e^x / (m−1)!
        assert!((exp_divided_difference(&[0.0; 4]) - 1.0 / factorial(3)).abs() < 1e-14);
        assert!((exp_divided_difference(&[0.5; 3]) - 0.5f64.exp() / 2.0).abs() < 1e-14);
        let two = exp_divided_difference(&[0.0, -2.0]);
        assert!((two - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
        // both branches agree near the switch
        let a = exp_divided_difference(&[0.0, -1.0, -2.05]);
        let j = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -2.05]);
        assert!((a - j.exp()[(0, 2)]).abs() < 1e-13);
        let close = exp_divided_difference(&[0.0, -1.0, -1.0 - 1e-9]);
        let limit = exp_divided_difference(&[0.0, -1.0, -1.0]);
        assert!((close - limit).abs() < 1e-9);
    }
}
