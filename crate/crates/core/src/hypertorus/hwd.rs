//! Hypertoroidal wrapped Dirac mixture.

use rand::distr::weighted::WeightedIndex;
use rand::RngCore;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{
    correlation_jammalamadaka_from_moments, correlation_johnson_from_moments,
    correlation_jupp_from_moments, covariance4d_from_moments, mean4d_from_moments,
    HypertoroidalWN,
};
use crate::circular::WrappedDiracMixture;
use crate::error::{Error, Result};
use crate::numerics::{wrap_f64, Complex64};

/// Weighted point masses on `[0, 2π)^d`. Has no density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HwdParams")]
pub struct HypertoroidalWD {
    #[serde(rename = "d")]
    points: Vec<Vec<f64>>,
    #[serde(rename = "w")]
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct HwdParams {
    d: Vec<Vec<f64>>,
    w: Vec<f64>,
}

impl TryFrom<HwdParams> for HypertoroidalWD {
    type Error = Error;
    fn try_from(p: HwdParams) -> Result<Self> {
        HypertoroidalWD::new(p.d, p.w)
    }
}

impl HypertoroidalWD {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        let d = points.first().map(|p| p.len()).unwrap_or(0);
        if d == 0 {
            return Err(Error::param("d", "need at least one nonempty point"));
        }
        let mut wrapped = Vec::with_capacity(points.len());
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::param("d", "non-finite coordinate"));
            }
            wrapped.push(p.into_iter().map(wrap_f64).collect());
        }
        Ok(Self {
            points: wrapped,
            weights: crate::circular::simplex("w", &weights, true)?,
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

    pub fn trigonometric_moment(&self, k: &[i32]) -> Complex64 {
        self.points
            .iter()
            .zip(self.weights.iter())
            .map(|(p, &w)| {
                let ph: f64 = p.iter().zip(k).map(|(a, &b)| a * b as f64).sum();
                Complex64::from_polar(w, ph)
            })
            .sum()
    }

    pub fn marginalize_to_1d(&self, dim: usize) -> Result<WrappedDiracMixture> {
        if dim >= self.dim() {
            return Err(Error::param("dimension", "axis out of range"));
        }
        WrappedDiracMixture::new(
            self.points.iter().map(|p| p[dim]).collect(),
            self.weights.clone(),
        )
    }

    pub fn apply_function(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        Self::new(self.points.iter().map(|p| f(p)).collect(), self.weights.clone())
    }

    pub fn reweigh(&self, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let w: Vec<f64> = self
            .points
            .iter()
            .zip(self.weights.iter())
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

    pub fn to_hwn(&self) -> Result<HypertoroidalWN> {
        HypertoroidalWN::from_moments(self.dim(), |k| self.trigonometric_moment(k))
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let idx = WeightedIndex::new(&self.weights).expect("validated weights");
        (0..n).map(|_| self.points[idx.sample(rng)].clone()).collect()
    }

    fn moment2(&self) -> Result<impl Fn(i32, i32) -> Complex64 + '_> {
        if self.dim() != 2 {
            return Err(Error::Unsupported("four-dimensional summaries need d = 2".into()));
        }
        Ok(move |a: i32, b: i32| self.trigonometric_moment(&[a, b]))
    }

    pub fn mean4d(&self) -> Result<nalgebra::Vector4<f64>> {
        Ok(mean4d_from_moments(&self.moment2()?))
    }

    pub fn covariance4d(&self) -> Result<nalgebra::Matrix4<f64>> {
        Ok(covariance4d_from_moments(&self.moment2()?))
    }

    pub fn correlation_jammalamadaka(&self) -> Result<f64> {
        correlation_jammalamadaka_from_moments(&self.moment2()?)
    }

    pub fn correlation_johnson(&self) -> Result<f64> {
        correlation_johnson_from_moments(&self.moment2()?)
    }

    pub fn correlation_jupp(&self) -> Result<f64> {
        correlation_jupp_from_moments(&self.moment2()?)
    }
}
