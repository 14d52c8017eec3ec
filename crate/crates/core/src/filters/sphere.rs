//! Von Mises–Fisher filter on the unit hypersphere.

use crate::error::Result;
use crate::hypersphere::VonMisesFisher;

#[derive(Debug, Clone)]
pub struct VmfFilter {
    estimate: VonMisesFisher,
}

impl VmfFilter {
    pub fn new(initial: VonMisesFisher) -> Self {
        Self { estimate: initial }
    }

    pub fn estimate(&self) -> &VonMisesFisher {
        &self.estimate
    }

    pub fn set_estimate(&mut self, e: VonMisesFisher) {
        self.estimate = e;
    }

    pub fn predict_identity(&mut self, noise: &VonMisesFisher) -> Result<()> {
        self.estimate = self.estimate.convolve(noise)?;
        Ok(())
    }

    /// Measurement `z` on the sphere with noise concentration `kappa`.
    pub fn update_identity(&mut self, z: &[f64], kappa: f64) -> Result<()> {
        if kappa == 0.0 {
            return Ok(());
        }
        let meas = VonMisesFisher::new(z, kappa)?;
        self.estimate = self.estimate.multiply(&meas)?;
        Ok(())
    }
}
