//! Von Mises and generalized von Mises distributions.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{integrate_density, CircularDensity};
use crate::error::{Error, Result};
use crate::numerics::{bessel_ratio, inverse_bessel_ratio, log_bessel_i, wrap, Angle, Complex64, TWO_PI};

/// Largest admissible concentration.
pub const MAX_KAPPA: f64 = 1e6;

pub(crate) fn concentration(name: &'static str, kappa: f64) -> Result<f64> {
    if !kappa.is_finite() {
        return Err(Error::param(name, format!("must be finite, got {kappa}")));
    }
    if kappa < 0.0 {
        return Err(Error::param(name, format!("must be nonnegative, got {kappa}")));
    }
    if kappa > MAX_KAPPA {
        return Err(Error::Degenerate(format!("{name} = {kappa} exceeds {MAX_KAPPA}")));
    }
    Ok(kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VmParams")]
pub struct VonMises {
    mu: Angle,
    kappa: f64,
    #[serde(skip_serializing)]
    log_norm: f64,
}

#[derive(Deserialize)]
struct VmParams {
    mu: f64,
    kappa: f64,
}

impl TryFrom<VmParams> for VonMises {
    type Error = Error;
    fn try_from(p: VmParams) -> Result<Self> {
        VonMises::new(p.mu, p.kappa)
    }
}

impl VonMises {
    pub fn new(mu: f64, kappa: f64) -> Result<Self> {
        let kappa = concentration("kappa", kappa)?;
        Ok(Self {
            mu: wrap(mu)?,
            kappa,
            log_norm: TWO_PI.ln() + log_bessel_i(0.0, kappa),
        })
    }

    pub fn mu(&self) -> Angle {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Moment-matched fit `μ = arg m1`, `κ = A_2⁻¹(|m1|)`.
    pub fn from_moment(m1: Complex64) -> Result<VonMises> {
        let r = m1.norm();
        if !r.is_finite() {
            return Err(Error::NonFinite(r));
        }
        if r <= 0.0 {
            return Err(Error::Inadmissible("|m1| = 0 has no defined mean".into()));
        }
        if r >= 1.0 {
            return Err(Error::Inadmissible(format!("|m1| = {r} >= 1 is a point mass")));
        }
        VonMises::new(m1.arg(), inverse_bessel_ratio(2, r)?)
    }

    /// Exact Bayesian fusion: `κ₃e^{iμ₃} = κ₁e^{iμ₁} + κ₂e^{iμ₂}`.
    pub fn multiply(&self, other: &VonMises) -> Result<VonMises> {
        let z = Complex64::from_polar(self.kappa, self.mu.value())
            + Complex64::from_polar(other.kappa, other.mu.value());
        let kappa = z.norm();
        let mu = if kappa > 0.0 { z.arg() } else { 0.0 };
        VonMises::new(mu, kappa)
    }

    /// Moment-matched convolution: means add and mean resultant lengths
    /// multiply.
    pub fn convolve(&self, other: &VonMises) -> Result<VonMises> {
        let r = bessel_ratio(2, self.kappa) * bessel_ratio(2, other.kappa);
        let kappa = if r > 0.0 { inverse_bessel_ratio(2, r)? } else { 0.0 };
        VonMises::new(self.mu.value() + other.mu.value(), kappa)
    }
}

impl CircularDensity for VonMises {
    fn pdf(&self, x: f64) -> f64 {
        (self.kappa * (x - self.mu.value()).cos() - self.log_norm).exp()
    }

    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        let r = if k == 0 {
            1.0
        } else {
            (log_bessel_i(k.unsigned_abs() as f64, self.kappa) - log_bessel_i(0.0, self.kappa)).exp()
        };
        Complex64::from_polar(r, k as f64 * self.mu.value())
    }

    fn entropy(&self) -> Result<f64> {
        Ok(self.log_norm - self.kappa * bessel_ratio(2, self.kappa))
    }

    /// Best–Fisher rejection sampler.
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        let k = self.kappa;
        if k < 1e-8 {
            return (0..n).map(|_| Angle::wrapped(rng.random::<f64>() * TWO_PI)).collect();
        }
        let tau = 1.0 + (1.0 + 4.0 * k * k).sqrt();
        let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * k);
        let r = (1.0 + rho * rho) / (2.0 * rho);
        (0..n)
            .map(|_| loop {
                let u1: f64 = rng.random();
                let u2: f64 = rng.random();
                let u3: f64 = rng.random();
                let z = (PI * u1).cos();
                let f = (1.0 + r * z) / (r + z);
                let c = k * (r - f);
                if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
                    let theta = f.clamp(-1.0, 1.0).acos();
                    let theta = if u3 > 0.5 { theta } else { -theta };
                    break Angle::wrapped(self.mu.value() + theta);
                }
            })
            .collect()
    }
}

/// Density proportional to `exp(κ₁cos(x−μ₁) + κ₂cos(2(x−μ₂)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GvmParams")]
pub struct GeneralizedVonMises {
    mu1: Angle,
    mu2: Angle,
    kappa1: f64,
    kappa2: f64,
    #[serde(skip_serializing)]
    log_norm: f64,
}

#[derive(Deserialize)]
struct GvmParams {
    mu1: f64,
    mu2: f64,
    kappa1: f64,
    kappa2: f64,
}

impl TryFrom<GvmParams> for GeneralizedVonMises {
    type Error = Error;
    fn try_from(p: GvmParams) -> Result<Self> {
        GeneralizedVonMises::new(p.mu1, p.mu2, p.kappa1, p.kappa2)
    }
}

impl GeneralizedVonMises {
    pub fn new(mu1: f64, mu2: f64, kappa1: f64, kappa2: f64) -> Result<Self> {
        let mut d = Self {
            mu1: wrap(mu1)?,
            mu2: wrap(mu2)?,
            kappa1: concentration("kappa1", kappa1)?,
            kappa2: concentration("kappa2", kappa2)?,
            log_norm: 0.0,
        };
        // normalize relative to the largest possible exponent
        let shift = kappa1 + kappa2;
        d.log_norm = shift;
        let z = integrate_density(&d, |x| d.pdf(x))?;
        d.log_norm = shift + z.ln();
        Ok(d)
    }

    pub fn mu1(&self) -> Angle {
        self.mu1
    }

    pub fn mu2(&self) -> Angle {
        self.mu2
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }
}

impl CircularDensity for GeneralizedVonMises {
    fn pdf(&self, x: f64) -> f64 {
        (self.kappa1 * (x - self.mu1.value()).cos()
            + self.kappa2 * (2.0 * (x - self.mu2.value())).cos()
            - self.log_norm)
            .exp()
    }
}
