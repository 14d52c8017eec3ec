//! Partially wrapped Dirac mixture on `[0, 2π) × R²`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use rand::distr::weighted::WeightedIndex;
use rand::RngCore;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::weighted_moments;
use crate::circular::{simplex, WrappedDiracMixture};
use crate::error::{Error, Result};
use crate::numerics::wrap_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PwdParams")]
pub struct Se2PartiallyWrappedDirac {
    #[serde(rename = "d")]
    points: Vec<[f64; 3]>,
    #[serde(rename = "w")]
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct PwdParams {
    d: Vec<[f64; 3]>,
    w: Vec<f64>,
}

impl TryFrom<PwdParams> for Se2PartiallyWrappedDirac {
    type Error = Error;
    fn try_from(p: PwdParams) -> Result<Self> {
        Se2PartiallyWrappedDirac::new(p.d, p.w)
    }
}

impl Se2PartiallyWrappedDirac {
    pub fn new(points: Vec<[f64; 3]>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("d", "need at least one point"));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::param("d", "non-finite coordinate"));
        }
        Ok(Self {
            points: points.into_iter().map(|p| [wrap_f64(p[0]), p[1], p[2]]).collect(),
            weights: simplex("w", &weights, true)?,
        })
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn embedded(&self) -> Vec<Vector4<f64>> {
        self.points
            .iter()
            .map(|p| Vector4::new(p[0].cos(), p[0].sin(), p[1], p[2]))
            .collect()
    }

    pub fn mean4d(&self) -> Vector4<f64> {
        weighted_moments(&self.embedded(), &self.weights).0
    }

    pub fn covariance4d(&self) -> Matrix4<f64> {
        weighted_moments(&self.embedded(), &self.weights).1
    }

    pub fn marginal_angle(&self) -> WrappedDiracMixture {
        WrappedDiracMixture::new(self.points.iter().map(|p| p[0]).collect(), self.weights.clone())
            .expect("validated mixture")
    }

    /// Weighted mean and covariance of the translation part.
    pub fn translation_moments(&self) -> (Vector2<f64>, Matrix2<f64>) {
        let c = self.covariance4d();
        let m = self.mean4d();
        (Vector2::new(m[2], m[3]), c.fixed_view::<2, 2>(2, 2).into_owned())
    }

    pub fn reweigh(&self, f: impl Fn(&[f64; 3]) -> f64) -> Result<Self> {
        let w: Vec<f64> = self.points.iter().zip(&self.weights).map(|(p, &w)| w * f(p)).collect();
        let s: f64 = w.iter().sum();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Degenerate(format!("reweighted mass {s}")));
        }
        let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        Ok(Self {
            points: keep.iter().map(|&i| self.points[i]).collect(),
            weights: keep.iter().map(|&i| w[i] / s).collect(),
        })
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<[f64; 3]> {
        let idx = WeightedIndex::new(&self.weights).expect("validated weights");
        (0..n).map(|_| self.points[idx.sample(rng)]).collect()
    }
}
