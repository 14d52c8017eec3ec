//! Filters on the torus and hypertorus.

use crate::error::{Error, Result};
use crate::fourier::Transformation;
use crate::hypertorus::{HypertoroidalDensity, HypertoroidalFourier, HypertoroidalWN};
use crate::numerics::TWO_PI;

/// Keeps the estimate a hypertoroidal wrapped normal.
#[derive(Debug, Clone)]
pub struct ToroidalWnFilter {
    estimate: HypertoroidalWN,
}

impl ToroidalWnFilter {
    pub fn new(initial: HypertoroidalWN) -> Self {
        Self { estimate: initial }
    }

    pub fn estimate(&self) -> &HypertoroidalWN {
        &self.estimate
    }

    pub fn set_estimate(&mut self, e: HypertoroidalWN) {
        self.estimate = e;
    }

    /// Means and covariances add.
    pub fn predict_identity(&mut self, noise: &HypertoroidalWN) -> Result<()> {
        self.estimate = self.estimate.convolve(noise)?;
        Ok(())
    }

    /// Gauss–Hermite samples of the prior are pushed through `a`, refitted
    /// by moment matching and convolved with the noise.
    pub fn predict_nonlinear(&mut self, a: &dyn Fn(&[f64]) -> Vec<f64>, noise: &HypertoroidalWN) -> Result<()> {
        let d = self.estimate.to_dirac_gauss_hermite(5)?;
        let fitted = d.apply_function(a)?.to_hwn()?;
        self.estimate = fitted.convolve(noise)?;
        Ok(())
    }

    /// Measurement `z = x + v`, `v` distributed as `noise`.
    pub fn update_identity(&mut self, z: &[f64], noise: &HypertoroidalWN) -> Result<()> {
        let dim = self.estimate.mu().len();
        if z.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: z.len(),
            });
        }
        let mu: Vec<f64> = z.iter().zip(noise.mu()).map(|(z, m)| z - m.value()).collect();
        let meas = HypertoroidalWN::new(mu, noise.c().clone())?;
        self.estimate = self.estimate.multiply(&meas)?;
        Ok(())
    }
}

/// Hypertoroidal Fourier filter with a fixed coefficient shape.
#[derive(Debug, Clone)]
pub struct HypertoroidalFourierFilter {
    estimate: HypertoroidalFourier,
}

impl HypertoroidalFourierFilter {
    pub fn new(shape: Vec<usize>, transformation: Transformation) -> Result<Self> {
        Ok(Self {
            estimate: HypertoroidalFourier::uniform(shape, transformation)?,
        })
    }

    pub fn from_density(d: &dyn HypertoroidalDensity, shape: Vec<usize>, transformation: Transformation) -> Result<Self> {
        Ok(Self {
            estimate: HypertoroidalFourier::from_distribution(d, shape, transformation)?,
        })
    }

    pub fn estimate(&self) -> &HypertoroidalFourier {
        &self.estimate
    }

    pub fn predict_identity(&mut self, noise: &dyn HypertoroidalDensity) -> Result<()> {
        let fd = HypertoroidalFourier::from_distribution(noise, self.estimate.shape().to_vec(), self.estimate.transformation())?;
        self.estimate = self.estimate.convolve(&fd)?;
        Ok(())
    }

    pub fn update(&mut self, likelihood: &dyn Fn(&[f64]) -> f64) -> Result<()> {
        let shape = self.estimate.shape().to_vec();
        if probe_is_flat(likelihood, &shape) {
            return Ok(());
        }
        let l = HypertoroidalFourier::from_function(likelihood, shape, self.estimate.transformation())?;
        self.estimate = self.estimate.multiply(&l)?;
        Ok(())
    }

    pub fn update_identity(&mut self, z: &[f64], noise: &dyn HypertoroidalDensity) -> Result<()> {
        self.update(&|x: &[f64]| {
            let v: Vec<f64> = z.iter().zip(x).map(|(z, x)| z - x).collect();
            noise.pdf(&v)
        })
    }
}

/// Evaluates `f` on the sampling grid for `shape` and reports whether all
/// values coincide.
fn probe_is_flat(f: &dyn Fn(&[f64]) -> f64, shape: &[usize]) -> bool {
    let grid: Vec<usize> = shape.iter().map(|s| 4 * s).collect();
    let total: usize = grid.iter().product();
    let mut x = vec![0.0; shape.len()];
    let mut values = Vec::with_capacity(total);
    for mut lin in 0..total {
        for a in (0..grid.len()).rev() {
            x[a] = TWO_PI * (lin % grid[a]) as f64 / grid[a] as f64;
            lin /= grid[a];
        }
        values.push(f(&x));
    }
    super::is_flat(&values)
}
