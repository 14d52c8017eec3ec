//! Von Mises–Fisher distribution.

use nalgebra::DVector;
use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::{uniform_direction, unit_vector, HypersphericalDensity, SphericalDiracMixture};
use crate::circular::concentration;
use crate::error::{Error, Result};
use crate::numerics::{bessel_ratio, inverse_bessel_ratio, log_bessel_i, sphere_area};

/// `ln C_d(κ)` with `C_d(κ) = κ^{d/2−1} / ((2π)^{d/2} I_{d/2−1}(κ))`.
pub fn vmf_log_norm(d: usize, kappa: f64) -> f64 {
    if kappa < 1e-12 {
        return -sphere_area(d).ln();
    }
    let nu = d as f64 / 2.0 - 1.0;
    nu * kappa.ln() - (d as f64 / 2.0) * (2.0 * std::f64::consts::PI).ln() - log_bessel_i(nu, kappa)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VmfParams", into = "VmfParams")]
pub struct VonMisesFisher {
    mu: DVector<f64>,
    kappa: f64,
    log_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct VmfParams {
    mu: Vec<f64>,
    kappa: f64,
}

impl TryFrom<VmfParams> for VonMisesFisher {
    type Error = Error;
    fn try_from(p: VmfParams) -> Result<Self> {
        VonMisesFisher::new(&p.mu, p.kappa)
    }
}

impl From<VonMisesFisher> for VmfParams {
    fn from(v: VonMisesFisher) -> Self {
        VmfParams {
            mu: v.mu.iter().copied().collect(),
            kappa: v.kappa,
        }
    }
}

impl VonMisesFisher {
    pub fn new(mu: &[f64], kappa: f64) -> Result<Self> {
        let mu = unit_vector("mu", mu)?;
        let kappa = concentration("kappa", kappa)?;
        Ok(Self {
            log_norm: vmf_log_norm(mu.len(), kappa),
            mu,
            kappa,
        })
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `E[μᵀx] = A_d(κ)`.
    pub fn mean_resultant_length(&self) -> f64 {
        if self.kappa == 0.0 {
            0.0
        } else {
            bessel_ratio(self.dim(), self.kappa)
        }
    }

    /// Maximum-likelihood fit from weighted unit vectors.
    pub fn fit(samples: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        let d = samples
            .first()
            .map(|p| p.len())
            .ok_or_else(|| Error::param("samples", "need at least one"))?;
        if weights.len() != samples.len() {
            return Err(Error::DimensionMismatch {
                expected: samples.len(),
                found: weights.len(),
            });
        }
        let mut r = DVector::zeros(d);
        let mut total = 0.0;
        for (p, &w) in samples.iter().zip(weights) {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            r += w * DVector::from_column_slice(p);
            total += w;
        }
        if !(total > 0.0) {
            return Err(Error::param("weights", "must have positive sum"));
        }
        Self::from_resultant(&(r / total))
    }

    /// Fit from the mean resultant vector `E[x]`.
    pub fn from_resultant(m: &DVector<f64>) -> Result<Self> {
        let rbar = m.norm();
        if rbar < 1e-12 {
            return Err(Error::UndefinedMean);
        }
        let kappa = inverse_bessel_ratio(m.len(), rbar)?;
        let mu = m / rbar;
        Self::new(mu.as_slice(), kappa)
    }

    fn same_dim(&self, other: &VonMisesFisher) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Exact product: `κ₃μ₃ = κ₁μ₁ + κ₂μ₂`. A vanishing sum gives the
    /// uniform-equivalent instance with `μ₃ = μ₁`.
    pub fn multiply(&self, other: &VonMisesFisher) -> Result<VonMisesFisher> {
        self.same_dim(other)?;
        let v = self.kappa * &self.mu + other.kappa * &other.mu;
        let k = v.norm();
        if k < 1e-12 {
            return VonMisesFisher::new(self.mu.as_slice(), 0.0);
        }
        VonMisesFisher::new((v / k).as_slice(), k)
    }

    /// Approximate convolution with rotationally symmetric noise: the mean
    /// direction is kept and `A_d(κ₃) = A_d(κ₁)A_d(κ₂)`.
    pub fn convolve(&self, noise: &VonMisesFisher) -> Result<VonMisesFisher> {
        self.same_dim(noise)?;
        let r = self.mean_resultant_length() * noise.mean_resultant_length();
        VonMisesFisher::new(self.mu.as_slice(), inverse_bessel_ratio(self.dim(), r)?)
    }

    /// `2d − 1` equally weighted points: the mode and a ring of `2(d−1)`
    /// points at angle `α` around it, with `α` chosen so that the mean
    /// resultant length equals `A_d(κ)`.
    pub fn deterministic_sample(&self) -> Result<SphericalDiracMixture> {
        let d = self.dim();
        let n = 2 * d - 1;
        let a = self.mean_resultant_length();
        let cos_a = ((a * n as f64 - 1.0) / (n as f64 - 1.0)).clamp(-1.0, 1.0);
        let sin_a = (1.0 - cos_a * cos_a).max(0.0).sqrt();
        let basis = tangent_basis(&self.mu);
        let mut points = vec![self.mu.iter().copied().collect::<Vec<f64>>()];
        for b in &basis {
            for s in [1.0, -1.0] {
                let p = cos_a * &self.mu + (s * sin_a) * b;
                let p = &p / p.norm();
                points.push(p.iter().copied().collect());
            }
        }
        SphericalDiracMixture::new(points, vec![1.0; n])
    }

    /// Mode `μ`.
    pub fn mode(&self) -> &DVector<f64> {
        &self.mu
    }
}

/// Orthonormal basis of the complement of `mu`, by Gram–Schmidt on the
/// standard basis.
pub(crate) fn tangent_basis(mu: &DVector<f64>) -> Vec<DVector<f64>> {
    let d = mu.len();
    let mut basis: Vec<DVector<f64>> = vec![mu.clone()];
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| mu[i].abs().partial_cmp(&mu[j].abs()).unwrap());
    for i in order {
        let mut v = DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 });
        for b in &basis {
            let c = b.dot(&v);
            v -= c * b;
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / n);
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

impl HypersphericalDensity for VonMisesFisher {
    fn dim(&self) -> usize {
        self.mu.len()
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        let dot: f64 = self.mu.iter().zip(x).map(|(a, b)| a * b).sum();
        (self.log_norm + self.kappa * dot).exp()
    }

    /// Tangent–normal construction: the cosine `w = μᵀx` is drawn by
    /// rejection from a transformed Beta variate, the tangent direction
    /// uniformly.
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let d = self.dim();
        let dm1 = (d - 1) as f64;
        if self.kappa == 0.0 {
            return (0..n).map(|_| uniform_direction(d, rng).iter().copied().collect()).collect();
        }
        let k = self.kappa;
        let b = dm1 / (2.0 * k + (4.0 * k * k + dm1 * dm1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = k * x0 + dm1 * (1.0 - x0 * x0).ln();
        let beta = Beta::new(dm1 / 2.0, dm1 / 2.0).expect("valid shape");
        (0..n)
            .map(|_| {
                let w = loop {
                    let z: f64 = beta.sample(rng);
                    let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
                    let u: f64 = rng.random();
                    if k * w + dm1 * (1.0 - x0 * w).ln() - c >= u.ln() {
                        break w;
                    }
                };
                let v = loop {
                    let g = uniform_direction(d, rng);
                    let t = &g - g.dot(&self.mu) * &self.mu;
                    let tn = t.norm();
                    if tn > 1e-8 {
                        break t / tn;
                    }
                };
                let x = w * &self.mu + (1.0 - w * w).max(0.0).sqrt() * v;
                let x = &x / x.norm();
                x.iter().copied().collect()
            })
            .collect()
    }
}
