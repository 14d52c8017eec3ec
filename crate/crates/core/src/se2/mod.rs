//! Densities on the rigid-body motions SE(2).
//!
//! The partially wrapped family lives on `[0, 2π) × R²` with points
//! `(angle, x, y)`. The modified Bingham density lives on `S¹ × R²` with
//! points `(x_s, x_t)`, `‖x_s‖ = 1`, identifying `x_s` and `−x_s` jointly
//! with the translation.

mod bingham;
mod distribution;
mod pwd;
mod pwn;

pub use bingham::Se2Bingham;
pub use distribution::Se2Distribution;
pub use pwd::Se2PartiallyWrappedDirac;
pub use pwn::Se2PartiallyWrappedNormal;

use nalgebra::{Cholesky, DMatrix, DVector, Matrix4, Vector4};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point of the modified Bingham domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Se2Point {
    pub angle_pair: [f64; 2],
    pub translation: [f64; 2],
}

impl Se2Point {
    pub fn new(angle_pair: [f64; 2], translation: [f64; 2]) -> Result<Self> {
        let n = angle_pair[0].hypot(angle_pair[1]);
        if angle_pair.iter().chain(&translation).any(|v| !v.is_finite()) {
            return Err(Error::param("point", "non-finite coordinate"));
        }
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::param("angle_pair", format!("norm is {n}, not 1")));
        }
        Ok(Self {
            angle_pair,
            translation,
        })
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.angle_pair[0], self.angle_pair[1], self.translation[0], self.translation[1])
    }
}

/// Multivariate normal on `R^d`, used for translation marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: cov.nrows(),
            });
        }
        if Cholesky::new(cov.clone()).is_none() {
            return Err(Error::param("cov", "must be positive definite"));
        }
        Ok(Self { mean, cov })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        let chol = Cholesky::new(self.cov.clone()).expect("validated covariance");
        let r = DVector::from_column_slice(x) - &self.mean;
        let q = r.dot(&chol.solve(&r));
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        (-0.5 * (q + log_det + self.mean.len() as f64 * (2.0 * PI).ln())).exp()
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<DVector<f64>> {
        let l = Cholesky::new(self.cov.clone()).expect("validated covariance").l();
        let d = self.mean.len();
        (0..n)
            .map(|_| {
                let z: DVector<f64> = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(rng)));
                &self.mean + &l * z
            })
            .collect()
    }
}

/// Weighted mean and centered covariance of 4-vectors.
pub(crate) fn weighted_moments(v: &[Vector4<f64>], w: &[f64]) -> (Vector4<f64>, Matrix4<f64>) {
    let total: f64 = w.iter().sum();
    let mean = v.iter().zip(w).map(|(x, &wi)| x * wi).sum::<Vector4<f64>>() / total;
    let cov = v
        .iter()
        .zip(w)
        .map(|(x, &wi)| (x - mean) * (x - mean).transpose() * wi)
        .sum::<Matrix4<f64>>()
        / total;
    (mean, cov)
}
