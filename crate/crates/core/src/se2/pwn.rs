//! Partially wrapped normal distribution on `[0, 2π) × R²`.

use nalgebra::{Cholesky, DMatrix, DVector, Matrix3, Matrix4, Vector3, Vector4};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::Gaussian;
use crate::circular::{wrap_terms_for_sigma, WrappedNormal};
use crate::error::{Error, Result};
use crate::numerics::{wrap_f64, Complex64, TWO_PI};

/// Gaussian on `R³` with the first component wrapped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PwnParams", into = "PwnParams")]
pub struct Se2PartiallyWrappedNormal {
    mu: Vector3<f64>,
    c: Matrix3<f64>,
    c_inv: Matrix3<f64>,
    log_norm: f64,
    terms: i64,
}

#[derive(Serialize, Deserialize)]
struct PwnParams {
    mu: [f64; 3],
    c: [[f64; 3]; 3],
}

impl TryFrom<PwnParams> for Se2PartiallyWrappedNormal {
    type Error = Error;
    fn try_from(p: PwnParams) -> Result<Self> {
        Se2PartiallyWrappedNormal::new(p.mu, Matrix3::from_fn(|i, j| p.c[i][j]))
    }
}

impl From<Se2PartiallyWrappedNormal> for PwnParams {
    fn from(p: Se2PartiallyWrappedNormal) -> Self {
        PwnParams {
            mu: [p.mu[0], p.mu[1], p.mu[2]],
            c: std::array::from_fn(|i| std::array::from_fn(|j| p.c[(i, j)])),
        }
    }
}

impl Se2PartiallyWrappedNormal {
    pub fn new(mu: [f64; 3], c: Matrix3<f64>) -> Result<Self> {
        if mu.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("c", "non-finite entry"));
        }
        if (c - c.transpose()).amax() > 1e-12 * c.amax().max(1.0) {
            return Err(Error::param("c", "must be symmetric"));
        }
        let c = (c + c.transpose()) * 0.5;
        let chol = Cholesky::new(c).ok_or_else(|| Error::param("c", "must be positive definite"))?;
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(Self {
            mu: Vector3::new(wrap_f64(mu[0]), mu[1], mu[2]),
            c,
            c_inv: chol.inverse(),
            log_norm: 0.5 * (3.0 * (2.0 * PI).ln() + log_det),
            terms: wrap_terms_for_sigma(c[(0, 0)].sqrt()),
        })
    }

    pub fn mu(&self) -> &Vector3<f64> {
        &self.mu
    }

    pub fn c(&self) -> &Matrix3<f64> {
        &self.c
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        let base = Vector3::new(wrap_f64(x[0]), x[1], x[2]) - self.mu;
        (-self.terms..=self.terms)
            .map(|k| {
                let r = base + Vector3::new(TWO_PI * k as f64, 0.0, 0.0);
                (-0.5 * (r.transpose() * self.c_inv * r)[(0, 0)] - self.log_norm).exp()
            })
            .sum()
    }

    /// `E[e^{i x₁}] = e^{iμ₁ − C₁₁/2}`.
    fn angle_moment(&self, k: f64) -> Complex64 {
        Complex64::from_polar((-0.5 * k * k * self.c[(0, 0)]).exp(), k * self.mu[0])
    }

    /// `E[(cos x₁, sin x₁, x₂, x₃)]`.
    pub fn mean4d(&self) -> Vector4<f64> {
        let m = self.angle_moment(1.0);
        Vector4::new(m.re, m.im, self.mu[1], self.mu[2])
    }

    /// Covariance of `(cos x₁, sin x₁, x₂, x₃)`. The cross terms follow from
    /// `E[e^{i x₁}(x_j − μ_j)] = i C_{1j} E[e^{i x₁}]`.
    pub fn covariance4d(&self) -> Matrix4<f64> {
        let m1 = self.angle_moment(1.0);
        let m2 = self.angle_moment(2.0);
        let mut s = Matrix4::zeros();
        s[(0, 0)] = 0.5 * (1.0 + m2.re) - m1.re * m1.re;
        s[(1, 1)] = 0.5 * (1.0 - m2.re) - m1.im * m1.im;
        s[(0, 1)] = 0.5 * m2.im - m1.re * m1.im;
        s[(1, 0)] = s[(0, 1)];
        for j in 1..3 {
            let cj = self.c[(0, j)];
            s[(0, j + 1)] = -cj * m1.im;
            s[(1, j + 1)] = cj * m1.re;
            s[(j + 1, 0)] = s[(0, j + 1)];
            s[(j + 1, 1)] = s[(1, j + 1)];
            for l in 1..3 {
                s[(j + 1, l + 1)] = self.c[(j, l)];
            }
        }
        s
    }

    pub fn marginal_angle(&self) -> WrappedNormal {
        WrappedNormal::new(self.mu[0], self.c[(0, 0)].sqrt()).expect("validated covariance")
    }

    pub fn marginal_translation(&self) -> Gaussian {
        Gaussian::new(
            DVector::from_column_slice(&[self.mu[1], self.mu[2]]),
            DMatrix::from_fn(2, 2, |i, j| self.c[(i + 1, j + 1)]),
        )
        .expect("validated covariance")
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<[f64; 3]> {
        let g = Gaussian::new(
            DVector::from_column_slice(self.mu.as_slice()),
            DMatrix::from_fn(3, 3, |i, j| self.c[(i, j)]),
        )
        .expect("validated covariance");
        g.sample(n, rng)
            .into_iter()
            .map(|v| [wrap_f64(v[0]), v[1], v[2]])
            .collect()
    }
}
