//! Recursive Bayesian filters.
//!
//! Each filter owns its current estimate and advances it with `predict_*`
//! and `update_*` calls. Likelihoods are passed as functions of the state
//! for a fixed measurement.

mod circular;
mod discrete;
mod fourier;
mod particle;
mod sphere;
mod torus;

pub use circular::{VmFilter, WnFilter};
pub use discrete::{pwc_transition_from_noise, GridFilter, PwcFilter};
pub use fourier::FourierFilter;
pub use particle::{CircularParticleFilter, HypertoroidalParticleFilter};
pub use sphere::VmfFilter;
pub use torus::{HypertoroidalFourierFilter, ToroidalWnFilter};

use crate::circular::WrappedDiracMixture;
use crate::error::{Error, Result};
use crate::numerics::Complex64;

/// Upper bound on progression steps of a progressive update.
pub const MAX_PROGRESSIVE_STEPS: usize = 50;

/// Largest likelihood ratio between deterministic samples in one step.
pub const PROGRESSIVE_RATIO: f64 = std::f64::consts::E * std::f64::consts::E;

fn evaluate(likelihood: &dyn Fn(f64) -> f64, x: &[f64]) -> Result<Vec<f64>> {
    let l: Vec<f64> = x.iter().map(|&v| likelihood(v)).collect();
    if let Some(bad) = l.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::param("likelihood", format!("must be finite and nonnegative, got {bad}")));
    }
    Ok(l)
}

/// True when all likelihood values coincide, so that the update cannot
/// change the estimate and is skipped to keep it bit-identical.
pub(crate) fn is_flat(values: &[f64]) -> bool {
    values.first().is_some_and(|&v| v > 0.0 && v.is_finite()) && values.windows(2).all(|w| w[0] == w[1])
}

/// Progressive Bayes update: the likelihood is applied as `L^{γ₁}⋯L^{γ_s}`
/// with `Σγ = 1`, each `γ` chosen so that the reweighting ratio between the
/// current deterministic samples stays below [`PROGRESSIVE_RATIO`]. After
/// each step the assumed family is refitted from the reweighted first
/// moment. Returns the new state and the number of steps taken.
pub(crate) fn progressive_update<S>(
    mut state: S,
    samples: impl Fn(&S) -> Result<WrappedDiracMixture>,
    refit: impl Fn(Complex64) -> Result<S>,
    likelihood: &dyn Fn(f64) -> f64,
) -> Result<(S, usize)> {
    let mut remaining = 1.0f64;
    let mut steps = 0;
    while remaining > 1e-12 {
        let wd = samples(&state)?;
        let x: Vec<f64> = wd.positions().iter().map(|a| a.value()).collect();
        let l = evaluate(likelihood, &x)?;
        if is_flat(&l) {
            break;
        }
        let hi = l.iter().cloned().fold(0.0, f64::max);
        if hi <= 0.0 {
            return Err(Error::Degenerate("likelihood vanishes at every sample".into()));
        }
        let lo = l.iter().cloned().fold(f64::INFINITY, f64::min);
        let gamma = if steps + 1 >= MAX_PROGRESSIVE_STEPS {
            remaining
        } else if lo <= 0.0 {
            remaining / (MAX_PROGRESSIVE_STEPS - steps) as f64
        } else {
            let spread = (hi / lo).ln();
            if spread <= PROGRESSIVE_RATIO.ln() * remaining {
                remaining
            } else {
                PROGRESSIVE_RATIO.ln() / spread
            }
        };
        let w: Vec<f64> = wd
            .weights()
            .iter()
            .zip(&l)
            .map(|(w, v)| w * (v / hi).powf(gamma))
            .collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate("reweighted samples have no mass".into()));
        }
        let m: Complex64 = w
            .iter()
            .zip(&x)
            .map(|(w, &v)| Complex64::from_polar(*w, v))
            .sum::<Complex64>()
            / total;
        state = refit(m)?;
        remaining -= gamma;
        steps += 1;
    }
    Ok((state, steps))
}
