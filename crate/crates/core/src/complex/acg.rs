//! Complex angular central Gaussian distribution.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{complex_gaussian, ComplexSphericalDensity};
use crate::error::{Error, Result};
use crate::numerics::{ln_gamma, Complex64};

/// Density `Γ(n)/(2πⁿ) |Σ|⁻¹ (zᴴΣ⁻¹z)^{−n}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "AcgParams", into = "AcgParams")]
pub struct ComplexACG {
    sigma: DMatrix<Complex64>,
    chol: Cholesky<Complex64, Dyn>,
    log_det: f64,
}

impl PartialEq for ComplexACG {
    fn eq(&self, other: &Self) -> bool {
        self.sigma == other.sigma
    }
}

#[derive(Serialize, Deserialize)]
struct AcgParams {
    sigma: Vec<Vec<Complex64>>,
}

impl TryFrom<AcgParams> for ComplexACG {
    type Error = Error;
    fn try_from(p: AcgParams) -> Result<Self> {
        let n = p.sigma.len();
        if p.sigma.iter().any(|r| r.len() != n) {
            return Err(Error::param("sigma", "must be square"));
        }
        ComplexACG::new(DMatrix::from_fn(n, n, |i, j| p.sigma[i][j]))
    }
}

impl From<ComplexACG> for AcgParams {
    fn from(c: ComplexACG) -> Self {
        let n = c.dim();
        AcgParams {
            sigma: (0..n).map(|i| (0..n).map(|j| c.sigma[(i, j)]).collect()).collect(),
        }
    }
}

impl ComplexACG {
    pub fn new(sigma: DMatrix<Complex64>) -> Result<Self> {
        let n = sigma.nrows();
        if n == 0 || sigma.ncols() != n {
            return Err(Error::param("sigma", "must be a nonempty square matrix"));
        }
        if sigma.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::param("sigma", "non-finite entry"));
        }
        let scale = 1.0 + sigma.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if (&sigma - sigma.adjoint()).iter().any(|c| c.norm() > 1e-12 * scale) {
            return Err(Error::param("sigma", "not Hermitian"));
        }
        let sigma = (&sigma + sigma.adjoint()).unscale(2.0);
        let min_eig = SymmetricEigen::new(sigma.clone()).eigenvalues.min();
        if !(min_eig > 0.0) {
            return Err(Error::param("sigma", "not positive definite"));
        }
        let chol = Cholesky::new(sigma.clone()).ok_or_else(|| Error::param("sigma", "not positive definite"))?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>();
        Ok(Self { sigma, chol, log_det })
    }

    pub fn sigma(&self) -> &DMatrix<Complex64> {
        &self.sigma
    }

    pub fn log_pdf(&self, z: &[Complex64]) -> f64 {
        let n = self.dim() as f64;
        let v = DVector::from_column_slice(z);
        let q = v.dotc(&self.chol.solve(&v)).re;
        ln_gamma(n) - (2.0 * PI.powf(n)).ln() - self.log_det - n * q.ln()
    }

    /// Fixed-point iteration `Σ ← n Σ_j w_j z_j z_jᴴ/(z_jᴴΣ⁻¹z_j) / Σ_j w_j`,
    /// normalized to trace `n`.
    pub fn fit(samples: &[Vec<Complex64>], weights: &[f64]) -> Result<Self> {
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
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::param("weights", "must have positive sum"));
        }
        let zs: Vec<DVector<Complex64>> = samples.iter().map(|s| DVector::from_column_slice(s)).collect();
        let mut sigma = DMatrix::<Complex64>::identity(n, n);
        const MAX_ITER: usize = 1000;
        for _ in 0..MAX_ITER {
            let chol = Cholesky::new(sigma.clone()).ok_or_else(|| Error::Degenerate("scatter became singular".into()))?;
            let mut next = DMatrix::zeros(n, n);
            for (z, &w) in zs.iter().zip(weights) {
                let q = z.dotc(&chol.solve(z)).re;
                next += (z * z.adjoint()).scale(w / q);
            }
            let tr = next.trace().re;
            next = (&next + next.adjoint()).scale(0.5 * n as f64 / tr);
            let change = (&next - &sigma).norm();
            sigma = next;
            if change < 1e-8 {
                return Self::new(sigma);
            }
        }
        Err(Error::IterationLimit { iterations: MAX_ITER })
    }
}

impl ComplexSphericalDensity for ComplexACG {
    fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    fn pdf(&self, z: &[Complex64]) -> f64 {
        self.log_pdf(z).exp()
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<Complex64>> {
        let l = self.chol.l();
        (0..n)
            .map(|_| loop {
                let x = &l * complex_gaussian(self.dim(), rng);
                let nrm = x.norm();
                if nrm > 1e-300 {
                    break x.unscale(nrm).iter().copied().collect();
                }
            })
            .collect()
    }
}
