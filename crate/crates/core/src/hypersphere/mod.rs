//! Distributions on the unit hypersphere `S^{d−1} ⊂ R^d`.
//!
//! Points are slices of `d` coordinates with unit norm. Densities are with
//! respect to the surface measure; quadrature-backed operations support
//! `d ∈ {2, 3, 4}`.

mod bingham;
mod dirac;
mod distribution;
mod vmf;
mod watson;

pub use bingham::{bingham_norm_const, BinghamDist};
pub use dirac::{HypersphericalUniform, SphericalDiracMixture};
pub use distribution::HypersphericalDistribution;
pub use vmf::{vmf_log_norm, VonMisesFisher};
pub use watson::WatsonDist;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::integrate_sphere;

/// Tolerance on `‖x‖ = 1` for parameters and evaluation points.
pub const UNIT_TOL: f64 = 1e-10;

pub trait HypersphericalDensity: fmt::Debug + Send + Sync {
    /// Ambient dimension `d`.
    fn dim(&self) -> usize;

    fn pdf(&self, x: &[f64]) -> f64;

    fn integral(&self) -> Result<f64> {
        integrate_sphere(|x| self.pdf(x), self.dim(), 1e-8)
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>>;
}

pub(crate) fn unit_vector(name: &'static str, v: &[f64]) -> Result<DVector<f64>> {
    if v.len() < 2 {
        return Err(Error::param(name, "needs at least two coordinates"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::param(name, "non-finite coordinate"));
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::param(name, format!("norm is {n}, not 1")));
    }
    Ok(DVector::from_column_slice(v))
}

pub(crate) fn check_unit_point(d: usize, x: &[f64]) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    unit_vector("x", x).map(|_| ())
}

pub(crate) fn uniform_direction(d: usize, rng: &mut dyn RngCore) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(rng)));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Weighted scatter matrix `Σ w_i x_i x_iᵀ / Σ w_i`.
pub fn scatter_matrix(points: &[Vec<f64>], weights: &[f64]) -> Result<DMatrix<f64>> {
    let d = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::param("samples", "need at least one"))?;
    if weights.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: weights.len(),
        });
    }
    let mut s = DMatrix::zeros(d, d);
    let mut total = 0.0;
    for (p, &w) in points.iter().zip(weights) {
        let x = DVector::from_column_slice(p);
        s += w * &x * x.transpose();
        total += w;
    }
    if !(total > 0.0) {
        return Err(Error::param("weights", "must have positive sum"));
    }
    Ok(s / total)
}

/// Second moment `E[x xᵀ]` by surface quadrature.
pub fn scatter_numerical(d: &dyn HypersphericalDensity) -> Result<DMatrix<f64>> {
    let n = d.dim();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = integrate_sphere(|x| x[i] * x[j] * d.pdf(x), n, 1e-9)?;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(s)
}
