//! Wrapped normal and von Mises assumed-density filters.

use super::progressive_update;
use crate::circular::{CircularDensity, VonMises, WrappedDiracMixture, WrappedNormal};
use crate::error::Result;
use crate::numerics::Complex64;

/// First moment of the deterministic samples pushed through `a`.
fn propagated_moment(d: &WrappedDiracMixture, a: &dyn Fn(f64) -> f64) -> Complex64 {
    d.positions()
        .iter()
        .zip(d.weights())
        .map(|(x, &w)| Complex64::from_polar(w, a(x.value())))
        .sum()
}

/// Keeps the estimate a wrapped normal.
#[derive(Debug, Clone)]
pub struct WnFilter {
    estimate: WrappedNormal,
}

impl WnFilter {
    pub fn new(initial: WrappedNormal) -> Self {
        Self { estimate: initial }
    }

    pub fn estimate(&self) -> &WrappedNormal {
        &self.estimate
    }

    pub fn set_estimate(&mut self, e: WrappedNormal) {
        self.estimate = e;
    }

    pub fn predict_identity(&mut self, noise: &WrappedNormal) -> Result<()> {
        self.estimate = self.estimate.convolve(noise)?;
        Ok(())
    }

    /// Five deterministic samples of the prior are propagated through `a`,
    /// a wrapped normal is fitted to their first moment and convolved with
    /// the noise.
    pub fn predict_nonlinear(&mut self, a: &dyn Fn(f64) -> f64, noise: &WrappedNormal) -> Result<()> {
        let d = self.estimate.to_dirac5()?;
        let fitted = WrappedNormal::from_moment(propagated_moment(&d, a))?;
        self.estimate = fitted.convolve(noise)?;
        Ok(())
    }

    /// Measurement `z = x + v` with `v` distributed as `noise`.
    pub fn update_identity(&mut self, z: f64, noise: &WrappedNormal) -> Result<()> {
        let meas = WrappedNormal::new(z - noise.mu().value(), noise.sigma())?;
        self.estimate = self.estimate.multiply(&meas)?;
        Ok(())
    }

    /// Progressive update with a likelihood `L(x)`; returns the number of
    /// progression steps.
    pub fn update_nonlinear_progressive(&mut self, likelihood: &dyn Fn(f64) -> f64) -> Result<usize> {
        let (e, steps) = progressive_update(
            self.estimate.clone(),
            |s: &WrappedNormal| s.to_dirac5(),
            WrappedNormal::from_moment,
            likelihood,
        )?;
        self.estimate = e;
        Ok(steps)
    }
}

/// Keeps the estimate a von Mises distribution.
#[derive(Debug, Clone)]
pub struct VmFilter {
    estimate: VonMises,
}

impl VmFilter {
    pub fn new(initial: VonMises) -> Self {
        Self { estimate: initial }
    }

    pub fn estimate(&self) -> &VonMises {
        &self.estimate
    }

    pub fn set_estimate(&mut self, e: VonMises) {
        self.estimate = e;
    }

    pub fn predict_identity(&mut self, noise: &VonMises) -> Result<()> {
        self.estimate = self.estimate.convolve(noise)?;
        Ok(())
    }

    pub fn predict_nonlinear(&mut self, a: &dyn Fn(f64) -> f64, noise: &VonMises) -> Result<()> {
        let d = self.estimate.to_dirac5()?;
        let fitted = VonMises::from_moment(propagated_moment(&d, a))?;
        self.estimate = fitted.convolve(noise)?;
        Ok(())
    }

    pub fn update_identity(&mut self, z: f64, noise: &VonMises) -> Result<()> {
        let meas = VonMises::new(z - noise.mu().value(), noise.kappa())?;
        self.estimate = self.estimate.multiply(&meas)?;
        Ok(())
    }

    pub fn update_nonlinear_progressive(&mut self, likelihood: &dyn Fn(f64) -> f64) -> Result<usize> {
        let (e, steps) = progressive_update(
            self.estimate.clone(),
            |s: &VonMises| s.to_dirac5(),
            VonMises::from_moment,
            likelihood,
        )?;
        self.estimate = e;
        Ok(steps)
    }
}
