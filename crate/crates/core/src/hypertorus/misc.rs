//! Uniform, mixture and user-defined densities on the hypertorus.

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use super::{HypertoroidalDensity, HypertoroidalDistribution};
use crate::circular::simplex;
use crate::error::{Error, Result};
use crate::numerics::{default_tol, integrate_periodic, wrap_f64, Complex64, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "UniformParams")]
pub struct HypertoroidalUniform {
    dim: usize,
}

#[derive(Deserialize)]
struct UniformParams {
    dim: usize,
}

impl TryFrom<UniformParams> for HypertoroidalUniform {
    type Error = Error;
    fn try_from(p: UniformParams) -> Result<Self> {
        HypertoroidalUniform::new(p.dim)
    }
}

impl HypertoroidalUniform {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        Ok(Self { dim })
    }
}

impl HypertoroidalDensity for HypertoroidalUniform {
    fn dim(&self) -> usize {
        self.dim
    }

    fn pdf(&self, _x: &[f64]) -> f64 {
        TWO_PI.powi(-(self.dim as i32))
    }

    fn trigonometric_moment(&self, k: &[i32]) -> Complex64 {
        if k.iter().all(|&v| v == 0) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn integral(&self) -> Result<f64> {
        Ok(1.0)
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..self.dim).map(|_| rng.random::<f64>() * TWO_PI).collect())
            .collect()
    }
}

/// Finite mixture of hypertoroidal densities of equal dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MixtureParams")]
pub struct HypertoroidalMixture {
    components: Vec<HypertoroidalDistribution>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct MixtureParams {
    components: Vec<HypertoroidalDistribution>,
    weights: Vec<f64>,
}

impl TryFrom<MixtureParams> for HypertoroidalMixture {
    type Error = Error;
    fn try_from(p: MixtureParams) -> Result<Self> {
        HypertoroidalMixture::new(p.components, p.weights)
    }
}

impl HypertoroidalMixture {
    pub fn new(components: Vec<HypertoroidalDistribution>, weights: Vec<f64>) -> Result<Self> {
        if components.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: components.len(),
                found: weights.len(),
            });
        }
        let first = components
            .first()
            .ok_or_else(|| Error::param("components", "need at least one"))?;
        let d = first.dim();
        for c in &components {
            if c.density().is_none() {
                return Err(Error::param("components", "every component needs a density"));
            }
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.dim(),
                });
            }
        }
        Ok(Self {
            weights: simplex("weights", &weights, true)?,
            components,
        })
    }

    pub fn components(&self) -> &[HypertoroidalDistribution] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn parts(&self) -> impl Iterator<Item = (&dyn HypertoroidalDensity, f64)> {
        self.components
            .iter()
            .zip(self.weights.iter())
            .map(|(c, &w)| (c.density().expect("checked at construction"), w))
    }
}

impl HypertoroidalDensity for HypertoroidalMixture {
    fn dim(&self) -> usize {
        self.components[0].dim()
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        self.parts().map(|(c, w)| w * c.pdf(x)).sum()
    }

    fn trigonometric_moment(&self, k: &[i32]) -> Complex64 {
        self.parts().map(|(c, w)| w * c.trigonometric_moment(k)).sum()
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let idx = WeightedIndex::new(&self.weights).expect("validated weights");
        let mut counts = vec![0usize; self.components.len()];
        for _ in 0..n {
            counts[idx.sample(rng)] += 1;
        }
        let mut out = Vec::with_capacity(n);
        for ((c, _), &m) in self.parts().zip(counts.iter()) {
            if m > 0 {
                out.extend(c.sample(m, rng));
            }
        }
        out.shuffle(rng);
        out
    }
}

type PdfFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Density given by an arbitrary callable on `[0, 2π)^d`.
#[derive(Clone)]
pub struct CustomHypertoroidal {
    f: PdfFn,
    dim: usize,
    norm: f64,
}

impl fmt::Debug for CustomHypertoroidal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomHypertoroidal")
            .field("dim", &self.dim)
            .field("norm", &self.norm)
            .finish()
    }
}

impl CustomHypertoroidal {
    /// Wraps `f`; unless `prenormalized`, its integral (d ≤ 3) is divided out.
    pub fn new<F>(f: F, dim: usize, prenormalized: bool) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        let mut d = Self {
            f: Arc::new(f),
            dim,
            norm: 1.0,
        };
        if !prenormalized {
            let z = integrate_periodic(|x| d.pdf(x), dim, default_tol(dim))?;
            if !(z > 0.0 && z.is_finite()) {
                return Err(Error::param("pdf", format!("integral {z} is not positive")));
            }
            d.norm = z;
        }
        Ok(d)
    }

    pub fn normalization(&self) -> f64 {
        self.norm
    }
}

impl HypertoroidalDensity for CustomHypertoroidal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        let w: Vec<f64> = x.iter().map(|&v| wrap_f64(v)).collect();
        (self.f)(&w) / self.norm
    }
}
