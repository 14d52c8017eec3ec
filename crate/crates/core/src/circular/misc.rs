//! Uniform, piecewise constant, user-supplied and mixture densities.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand::distr::weighted::WeightedIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use super::wrapped::arc_mass;
use super::{integrate_density, CircularDensity, CircularDistribution};
use crate::error::{Error, Result};
use crate::numerics::{wrap_f64, Angle, Complex64, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CircularUniform {}

impl CircularUniform {
    pub fn new() -> Self {
        CircularUniform {}
    }
}

impl CircularDensity for CircularUniform {
    fn pdf(&self, _x: f64) -> f64 {
        1.0 / TWO_PI
    }

    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn entropy(&self) -> Result<f64> {
        Ok(TWO_PI.ln())
    }

    fn cdf(&self, x: f64, start: f64) -> Result<f64> {
        Ok(wrap_f64(x - start) / TWO_PI)
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        (0..n).map(|_| Angle::wrapped(rng.random::<f64>() * TWO_PI)).collect()
    }
}

/// Validates nonnegative weights with positive sum and rescales them to
/// sum to one.
pub(crate) fn simplex(name: &'static str, w: &[f64], strictly_positive: bool) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Err(Error::param(name, "must not be empty"));
    }
    for &v in w {
        if !v.is_finite() {
            return Err(Error::param(name, format!("non-finite weight {v}")));
        }
        if v < 0.0 || (strictly_positive && v == 0.0) {
            return Err(Error::param(name, format!("invalid weight {v}")));
        }
    }
    let s: f64 = w.iter().sum();
    if s <= 0.0 {
        return Err(Error::param(name, "weights sum to zero"));
    }
    // leave already-normalized input bit-identical so serialization round trips
    if (s - 1.0).abs() <= 1e-12 {
        return Ok(w.to_vec());
    }
    Ok(w.iter().map(|v| v / s).collect())
}

/// Step density with `L` equal intervals; `weights[i]` is the probability
/// mass of interval `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PwcParams")]
pub struct PiecewiseConstant {
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct PwcParams {
    weights: Vec<f64>,
}

impl TryFrom<PwcParams> for PiecewiseConstant {
    type Error = Error;
    fn try_from(p: PwcParams) -> Result<Self> {
        PiecewiseConstant::new(p.weights)
    }
}

impl PiecewiseConstant {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Ok(Self {
            weights: simplex("weights", &weights, false)?,
        })
    }

    /// Step approximation with interval masses proportional to the density
    /// at the interval centers.
    pub fn from_density(d: &dyn CircularDensity, l: usize) -> Result<Self> {
        let h = TWO_PI / l as f64;
        Self::new((0..l).map(|i| d.pdf((i as f64 + 0.5) * h)).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn interval_width(&self) -> f64 {
        TWO_PI / self.weights.len() as f64
    }

    /// Interval centers `(i + 1/2)·2π/L`.
    pub fn centers(&self) -> Vec<f64> {
        let h = self.interval_width();
        (0..self.len()).map(|i| (i as f64 + 0.5) * h).collect()
    }

    fn index(&self, x: f64) -> usize {
        ((wrap_f64(x) / self.interval_width()) as usize).min(self.len() - 1)
    }
}

impl CircularDensity for PiecewiseConstant {
    fn pdf(&self, x: f64) -> f64 {
        self.weights[self.index(x)] / self.interval_width()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let h = self.interval_width();
        (1..self.len()).map(|i| i as f64 * h).collect()
    }

    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        if k == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let h = self.interval_width();
        let kf = k as f64;
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let a = i as f64 * h;
                let b = a + h;
                w * (Complex64::from_polar(1.0, kf * b) - Complex64::from_polar(1.0, kf * a))
                    / Complex64::new(0.0, kf * h)
            })
            .sum()
    }

    fn entropy(&self) -> Result<f64> {
        let h = self.interval_width();
        Ok(-self
            .weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| w * (w / h).ln())
            .sum::<f64>())
    }

    fn cdf(&self, x: f64, start: f64) -> Result<f64> {
        let h = self.interval_width();
        let mut cum = Vec::with_capacity(self.len() + 1);
        cum.push(0.0);
        for w in &self.weights {
            cum.push(cum.last().unwrap() + w);
        }
        let cdf0 = |t: f64| {
            let i = self.index(t);
            cum[i] + self.weights[i] * (t - i as f64 * h) / h
        };
        Ok(arc_mass(cdf0, x, start))
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        let h = self.interval_width();
        let idx = WeightedIndex::new(&self.weights).expect("validated weights");
        (0..n)
            .map(|_| {
                let i = idx.sample(rng);
                Angle::wrapped((i as f64 + rng.random::<f64>()) * h)
            })
            .collect()
    }
}

type PdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Density given by an arbitrary callable on `[0, 2π)`.
#[derive(Clone)]
pub struct CustomCircular {
    f: PdfFn,
    norm: f64,
}

impl fmt::Debug for CustomCircular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomCircular").field("norm", &self.norm).finish()
    }
}

impl CustomCircular {
    /// Wraps `f`. Unless `prenormalized` is set, its integral is computed
    /// once here and divided out of every evaluation.
    pub fn new<F>(f: F, prenormalized: bool) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut d = Self {
            f: Arc::new(f),
            norm: 1.0,
        };
        if !prenormalized {
            let z = integrate_density(&d, |x| d.pdf(x))?;
            if !(z > 0.0 && z.is_finite()) {
                return Err(Error::param("pdf", format!("integral {z} is not positive")));
            }
            d.norm = z;
        }
        Ok(d)
    }

    /// Normalization constant divided out of the callable.
    pub fn normalization(&self) -> f64 {
        self.norm
    }
}

impl CircularDensity for CustomCircular {
    fn pdf(&self, x: f64) -> f64 {
        (self.f)(wrap_f64(x)) / self.norm
    }
}

/// Finite mixture of circular densities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MixtureParams")]
pub struct CircularMixture {
    components: Vec<CircularDistribution>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct MixtureParams {
    components: Vec<CircularDistribution>,
    weights: Vec<f64>,
}

impl TryFrom<MixtureParams> for CircularMixture {
    type Error = Error;
    fn try_from(p: MixtureParams) -> Result<Self> {
        CircularMixture::new(p.components, p.weights)
    }
}

impl CircularMixture {
    pub fn new(components: Vec<CircularDistribution>, weights: Vec<f64>) -> Result<Self> {
        if components.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: components.len(),
                found: weights.len(),
            });
        }
        if components.iter().any(|c| c.density().is_none()) {
            return Err(Error::param("components", "every component needs a density"));
        }
        Ok(Self {
            weights: simplex("weights", &weights, true)?,
            components,
        })
    }

    pub fn components(&self) -> &[CircularDistribution] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn parts(&self) -> impl Iterator<Item = (&dyn CircularDensity, f64)> {
        self.components
            .iter()
            .zip(self.weights.iter())
            .map(|(c, &w)| (c.density().expect("checked at construction"), w))
    }
}

impl CircularDensity for CircularMixture {
    fn pdf(&self, x: f64) -> f64 {
        self.parts().map(|(c, w)| w * c.pdf(x)).sum()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.parts().flat_map(|(c, _)| c.breakpoints()).collect()
    }

    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        self.parts().map(|(c, w)| w * c.trigonometric_moment(k)).sum()
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
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
