//! Wrapped Dirac mixtures and the deterministic three- and five-point
//! approximations built from trigonometric moments.

use rand::RngCore;
use rand::distr::weighted::WeightedIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::misc::simplex;
use super::{mean_from_moment, VonMises, WrappedNormal};
use crate::error::{Error, Result};
use crate::numerics::{wrap, Angle, Complex64};

/// Weighted point masses on the circle. Has no density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WdParams")]
pub struct WrappedDiracMixture {
    #[serde(rename = "d")]
    positions: Vec<Angle>,
    #[serde(rename = "w")]
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct WdParams {
    d: Vec<f64>,
    w: Vec<f64>,
}

impl TryFrom<WdParams> for WrappedDiracMixture {
    type Error = Error;
    fn try_from(p: WdParams) -> Result<Self> {
        WrappedDiracMixture::new(p.d, p.w)
    }
}

impl WrappedDiracMixture {
    /// Builds a mixture; positions are wrapped and positive weights rescaled
    /// to sum to one.
    pub fn new(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: positions.len(),
                found: weights.len(),
            });
        }
        let positions = positions.into_iter().map(wrap).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            positions,
            weights: simplex("weights", &weights, true)?,
        })
    }

    /// Equally weighted mixture.
    pub fn equal_weights(positions: Vec<f64>) -> Result<Self> {
        let n = positions.len();
        Self::new(positions, vec![1.0; n])
    }

    pub fn positions(&self) -> &[Angle] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn trigonometric_moment(&self, k: i32) -> Complex64 {
        let k = k as f64;
        self.positions
            .iter()
            .zip(self.weights.iter())
            .map(|(p, &w)| Complex64::from_polar(w, k * p.value()))
            .sum()
    }

    pub fn circular_mean(&self) -> Result<Angle> {
        mean_from_moment(self.trigonometric_moment(1))
    }

    pub fn circular_variance(&self) -> f64 {
        1.0 - self.trigonometric_moment(1).norm()
    }

    /// Moves every atom through `f`, keeping the weights.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let positions = self
            .positions
            .iter()
            .map(|p| wrap(f(p.value())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            positions,
            weights: self.weights.clone(),
        })
    }

    /// Multiplies each weight by `f(position)` and renormalizes.
    pub fn reweigh(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let w: Vec<f64> = self
            .positions
            .iter()
            .zip(self.weights.iter())
            .map(|(p, &w)| w * f(p.value()))
            .collect();
        let s: f64 = w.iter().sum();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Degenerate(format!("reweighted mass {s}")));
        }
        let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        Ok(Self {
            positions: keep.iter().map(|&i| self.positions[i]).collect(),
            weights: keep.iter().map(|&i| w[i] / s).collect(),
        })
    }

    /// Kish effective sample size `1 / Σ w²`.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn to_wn(&self) -> Result<WrappedNormal> {
        WrappedNormal::from_moment(self.trigonometric_moment(1))
    }

    pub fn to_vm(&self) -> Result<VonMises> {
        VonMises::from_moment(self.trigonometric_moment(1))
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        let idx = WeightedIndex::new(&self.weights).expect("validated weights");
        (0..n).map(|_| self.positions[idx.sample(rng)]).collect()
    }
}

fn admissible_length(m1: Complex64) -> Result<f64> {
    let r = m1.norm();
    if !r.is_finite() {
        return Err(Error::NonFinite(r));
    }
    if r < super::MEAN_UNDEFINED_BELOW {
        return Err(Error::Inadmissible("|m1| = 0 leaves the mean undefined".into()));
    }
    if r >= 1.0 {
        return Err(Error::Inadmissible(format!("|m1| = {r} >= 1")));
    }
    Ok(r)
}

/// Three equally weighted atoms at `μ − α, μ, μ + α` with
/// `cos α = (3|m1| − 1)/2`, which reproduce `m1` exactly for any
/// `0 < |m1| < 1`.
pub fn dirac3_from_moment(m1: Complex64) -> Result<WrappedDiracMixture> {
    let r = admissible_length(m1)?;
    let mu = m1.arg();
    let alpha = ((3.0 * r - 1.0) / 2.0).acos();
    WrappedDiracMixture::equal_weights(vec![mu - alpha, mu, mu + alpha])
}

/// Five atoms at `μ ± α₁, μ ± α₂, μ` reproducing `m1` and `|m2|`.
///
/// The center weight is taken halfway between the smallest and largest
/// value for which the remaining four atoms exist.
pub fn dirac5_from_moments(m1: Complex64, m2: Complex64) -> Result<WrappedDiracMixture> {
    let r1 = admissible_length(m1)?;
    let r2 = m2.norm();
    if !(r2.is_finite() && r2 < 1.0) {
        return Err(Error::Inadmissible(format!("|m2| = {r2} must lie in [0, 1)")));
    }
    let denom = 4.0 * r1 - r2 - 3.0;
    if denom >= 0.0 {
        return Err(Error::Inadmissible(format!(
            "moment pair (|m1| = {r1}, |m2| = {r2}) outside the five-point region"
        )));
    }
    let w_min = (4.0 * r1 * r1 - 4.0 * r1 - r2 + 1.0) / denom;
    let w_max = (2.0 * r1 * r1 - r2 - 1.0) / denom;
    let w5 = w_min + 0.5 * (w_max - w_min);
    if !(w_max > w_min && w5 > 0.0 && w5 < 1.0) {
        return Err(Error::Inadmissible(format!(
            "moment pair (|m1| = {r1}, |m2| = {r2}) admits no center weight"
        )));
    }
    let c1 = 2.0 * (r1 - w5) / (1.0 - w5);
    let c2 = (r2 - w5) / (1.0 - w5) + 1.0;
    let disc = 8.0 * c2 - 4.0 * c1 * c1;
    if disc < 0.0 {
        return Err(Error::Inadmissible("five-point cosines are complex".into()));
    }
    let x2 = (2.0 * c1 + disc.sqrt()) / 4.0;
    let x1 = c1 - x2;
    const SLACK: f64 = 1e-12;
    if x1.abs() > 1.0 + SLACK || x2.abs() > 1.0 + SLACK {
        return Err(Error::Inadmissible("five-point cosines leave [-1, 1]".into()));
    }
    let a1 = x1.clamp(-1.0, 1.0).acos();
    let a2 = x2.clamp(-1.0, 1.0).acos();
    let mu = m1.arg();
    let outer = (1.0 - w5) / 4.0;
    WrappedDiracMixture::new(
        vec![mu - a1, mu + a1, mu - a2, mu + a2, mu],
        vec![outer, outer, outer, outer, w5],
    )
}
