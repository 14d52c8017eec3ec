//! Fourier series filter in identity or square-root form.

use crate::circular::CircularDensity;
use crate::error::{Error, Result};
use crate::fourier::{FourierDensity, Transformation};
use crate::hypertorus::HypertoroidalFourier;
use crate::numerics::{Complex64, TWO_PI};

#[derive(Debug, Clone)]
pub struct FourierFilter {
    estimate: FourierDensity,
}

impl FourierFilter {
    /// Uniform prior with `n_coeffs` coefficients.
    pub fn new(n_coeffs: usize, transformation: Transformation) -> Result<Self> {
        Ok(Self {
            estimate: FourierDensity::uniform(n_coeffs, transformation)?,
        })
    }

    pub fn from_density(d: &dyn CircularDensity, n_coeffs: usize, transformation: Transformation) -> Result<Self> {
        Ok(Self {
            estimate: FourierDensity::from_distribution(d, n_coeffs, transformation)?,
        })
    }

    pub fn estimate(&self) -> &FourierDensity {
        &self.estimate
    }

    pub fn set_estimate(&mut self, e: FourierDensity) {
        self.estimate = e;
    }

    fn n_coeffs(&self) -> usize {
        self.estimate.coeffs().len()
    }

    pub fn predict_identity(&mut self, noise: &dyn CircularDensity) -> Result<()> {
        let fd = FourierDensity::from_distribution(noise, self.n_coeffs(), self.estimate.transformation())?;
        self.predict_identity_fourier(&fd)
    }

    pub fn predict_identity_fourier(&mut self, noise: &FourierDensity) -> Result<()> {
        self.estimate = self.estimate.convolve(noise)?;
        Ok(())
    }

    /// Chapman–Kolmogorov prediction with a transition density
    /// `f(x_{k+1}, x_k)` given as a two-dimensional Fourier series, the first
    /// axis being the successor state: `c'_a = 2π Σ_b T_{a,b} c_{−b}`.
    pub fn predict_transition(&mut self, transition: &HypertoroidalFourier) -> Result<()> {
        if transition.shape().len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: transition.shape().len(),
            });
        }
        let (t, shape) = transition.density_coefficients();
        let prior = self.estimate.to_identity();
        let n = self.n_coeffs();
        let (na, nb) = (shape[0] as i64 / 2, shape[1] as i64 / 2);
        let half = (n / 2) as i64;
        let coeffs: Vec<Complex64> = (-half..=half)
            .map(|a| {
                if a.abs() > na {
                    return Complex64::new(0.0, 0.0);
                }
                let row = (a + na) as usize * shape[1];
                (-nb..=nb)
                    .map(|b| t[row + (b + nb) as usize] * prior.coeff(-b))
                    .sum::<Complex64>()
                    * TWO_PI
            })
            .collect();
        let identity = FourierDensity::from_coefficients(coeffs, Transformation::Identity)?;
        self.estimate = match self.estimate.transformation() {
            Transformation::Identity => identity,
            Transformation::Sqrt => identity.to_sqrt(n)?,
        };
        Ok(())
    }

    /// Multiplies by the Fourier form of `likelihood` and renormalizes.
    pub fn update(&mut self, likelihood: &dyn Fn(f64) -> f64) -> Result<()> {
        let m = 4 * self.n_coeffs();
        let probe: Vec<f64> = (0..m).map(|j| likelihood(TWO_PI * j as f64 / m as f64)).collect();
        if super::is_flat(&probe) {
            return Ok(());
        }
        let l = FourierDensity::from_function(likelihood, self.n_coeffs(), self.estimate.transformation())?;
        self.estimate = self.estimate.multiply(&l)?;
        Ok(())
    }

    /// Measurement `z = x + v`, `v` distributed as `noise`.
    pub fn update_identity(&mut self, z: f64, noise: &dyn CircularDensity) -> Result<()> {
        self.update(&|x| noise.pdf(z - x))
    }
}
