//! Watson distribution.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{unit_vector, BinghamDist, HypersphericalDensity};
use crate::error::{Error, Result};
use crate::numerics::{log_kummer_m, sphere_area};

/// Density proportional to `exp(κ (μᵀx)²)`; bipolar for `κ > 0`, girdle for
/// `κ < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WatsonParams", into = "WatsonParams")]
pub struct WatsonDist {
    mu: DVector<f64>,
    kappa: f64,
    log_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct WatsonParams {
    mu: Vec<f64>,
    kappa: f64,
}

impl TryFrom<WatsonParams> for WatsonDist {
    type Error = Error;
    fn try_from(p: WatsonParams) -> Result<Self> {
        WatsonDist::new(&p.mu, p.kappa)
    }
}

impl From<WatsonDist> for WatsonParams {
    fn from(w: WatsonDist) -> Self {
        WatsonParams {
            mu: w.mu.iter().copied().collect(),
            kappa: w.kappa,
        }
    }
}

impl WatsonDist {
    pub fn new(mu: &[f64], kappa: f64) -> Result<Self> {
        let mu = unit_vector("mu", mu)?;
        if !kappa.is_finite() || kappa.abs() > 1e6 {
            return Err(Error::param("kappa", format!("must be finite and |κ| ≤ 1e6, got {kappa}")));
        }
        let d = mu.len() as f64;
        // ∫ exp(κ(μᵀx)²) dx = |S^{d−1}| · M(1/2, d/2, κ)
        let log_norm = sphere_area(mu.len()).ln() + log_kummer_m(0.5, d / 2.0, kappa);
        Ok(Self { mu, kappa, log_norm })
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Equivalent Bingham distribution with parameter matrix `κ μμᵀ`.
    pub fn to_bingham(&self) -> Result<BinghamDist> {
        let a: DMatrix<f64> = self.kappa * &self.mu * self.mu.transpose();
        BinghamDist::from_parameter_matrix(&a)
    }
}

impl HypersphericalDensity for WatsonDist {
    fn dim(&self) -> usize {
        self.mu.len()
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        let dot: f64 = self.mu.iter().zip(x).map(|(a, b)| a * b).sum();
        (self.kappa * dot * dot - self.log_norm).exp()
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        self.to_bingham().expect("valid Watson gives valid Bingham").sample(n, rng)
    }
}
