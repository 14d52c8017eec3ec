//! Uniform distribution and weighted point masses on the hypersphere.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::RngCore;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{scatter_matrix, uniform_direction, unit_vector, HypersphericalDensity};
use crate::circular::simplex;
use crate::error::{Error, Result};
use crate::numerics::sphere_area;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "UniformParams")]
pub struct HypersphericalUniform {
    dim: usize,
}

#[derive(Deserialize)]
struct UniformParams {
    dim: usize,
}

impl TryFrom<UniformParams> for HypersphericalUniform {
    type Error = Error;
    fn try_from(p: UniformParams) -> Result<Self> {
        HypersphericalUniform::new(p.dim)
    }
}

impl HypersphericalUniform {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::param("dim", "must be at least 2"));
        }
        Ok(Self { dim })
    }
}

impl HypersphericalDensity for HypersphericalUniform {
    fn dim(&self) -> usize {
        self.dim
    }

    fn pdf(&self, _x: &[f64]) -> f64 {
        1.0 / sphere_area(self.dim)
    }

    fn integral(&self) -> Result<f64> {
        Ok(1.0)
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| uniform_direction(self.dim, rng).iter().copied().collect())
            .collect()
    }
}

/// Weighted unit vectors. Has no density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiracParams")]
pub struct SphericalDiracMixture {
    #[serde(rename = "d")]
    points: Vec<Vec<f64>>,
    #[serde(rename = "w")]
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct DiracParams {
    d: Vec<Vec<f64>>,
    w: Vec<f64>,
}

impl TryFrom<DiracParams> for SphericalDiracMixture {
    type Error = Error;
    fn try_from(p: DiracParams) -> Result<Self> {
        SphericalDiracMixture::new(p.d, p.w)
    }
}

impl SphericalDiracMixture {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        let d = points
            .first()
            .map(|p| p.len())
            .ok_or_else(|| Error::param("d", "need at least one point"))?;
        for p in &points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            unit_vector("d", p)?;
        }
        Ok(Self {
            weights: simplex("w", &weights, true)?,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weighted mean `Σ w_i x_i`.
    pub fn mean_resultant(&self) -> DVector<f64> {
        let mut r = DVector::zeros(self.dim());
        for (p, &w) in self.points.iter().zip(&self.weights) {
            r += w * DVector::from_column_slice(p);
        }
        r
    }

    pub fn scatter(&self) -> DMatrix<f64> {
        scatter_matrix(&self.points, &self.weights).expect("validated mixture")
    }

    pub fn apply_function(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        Self::new(self.points.iter().map(|p| f(p)).collect(), self.weights.clone())
    }

    pub fn reweigh(&self, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let w: Vec<f64> = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * f(p))
            .collect();
        let s: f64 = w.iter().sum();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Degenerate(format!("reweighted mass {s}")));
        }
        let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        Ok(Self {
            points: keep.iter().map(|&i| self.points[i].clone()).collect(),
            weights: keep.iter().map(|&i| w[i] / s).collect(),
        })
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let idx = WeightedIndex::new(&self.weights).expect("validated weights");
        (0..n).map(|_| self.points[idx.sample(rng)].clone()).collect()
    }
}
