//! Sequential importance resampling on the circle and the hypertorus.

use rand::{Rng, RngCore};

use crate::circular::{CircularDensity, WrappedDiracMixture};
use crate::error::{Error, Result};
use crate::hypertorus::{HypertoroidalDensity, HypertoroidalWD};
use crate::numerics::wrap_f64;

/// Smallest weight regarded as nonzero before resampling.
const DEGENERACY: f64 = 1e-300;

/// Normalizes `w` in place after multiplying by `l`.
fn reweight(w: &mut [f64], l: &[f64]) -> Result<()> {
    if let Some(bad) = l.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::param("likelihood", format!("must be finite and nonnegative, got {bad}")));
    }
    for (w, l) in w.iter_mut().zip(l) {
        *w *= l;
    }
    if w.iter().all(|&v| v < DEGENERACY) {
        return Err(Error::Degenerate("all particle weights vanished".into()));
    }
    let s: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= s;
    }
    Ok(())
}

/// Systematic resampling: indices of the particles to keep.
fn systematic_indices(w: &[f64], rng: &mut dyn RngCore) -> Vec<usize> {
    let n = w.len();
    let u0: f64 = rng.random::<f64>() / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut cum = w[0];
    let mut j = 0;
    for i in 0..n {
        let u = u0 + i as f64 / n as f64;
        while u > cum && j + 1 < n {
            j += 1;
            cum += w[j];
        }
        out.push(j);
    }
    out
}

#[derive(Debug, Clone)]
pub struct CircularParticleFilter {
    particles: Vec<f64>,
    weights: Vec<f64>,
}

impl CircularParticleFilter {
    pub fn new(n: usize, initial: &dyn CircularDensity, rng: &mut dyn RngCore) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "need at least one particle"));
        }
        Ok(Self {
            particles: initial.sample(n, rng).into_iter().map(|a| a.value()).collect(),
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn from_particles(particles: Vec<f64>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::param("particles", "need at least one particle"));
        }
        if let Some(&p) = particles.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinite(p));
        }
        let n = particles.len();
        Ok(Self {
            particles: particles.into_iter().map(wrap_f64).collect(),
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn particles(&self) -> &[f64] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn estimate(&self) -> Result<WrappedDiracMixture> {
        WrappedDiracMixture::new(self.particles.clone(), self.weights.clone())
    }

    /// Propagates every particle through `a` and adds a draw of `noise`.
    pub fn predict(&mut self, a: &dyn Fn(f64) -> f64, noise: Option<&dyn CircularDensity>, rng: &mut dyn RngCore) -> Result<()> {
        let next: Vec<f64> = match noise {
            Some(d) => {
                let w = d.sample(self.particles.len(), rng);
                self.particles.iter().zip(w).map(|(&x, w)| a(x) + w.value()).collect()
            }
            None => self.particles.iter().map(|&x| a(x)).collect(),
        };
        if let Some(&p) = next.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinite(p));
        }
        self.particles = next.into_iter().map(wrap_f64).collect();
        Ok(())
    }

    pub fn predict_identity(&mut self, noise: &dyn CircularDensity, rng: &mut dyn RngCore) -> Result<()> {
        self.predict(&|x| x, Some(noise), rng)
    }

    /// Reweights by the likelihood and resamples to equal weights.
    pub fn update(&mut self, likelihood: &dyn Fn(f64) -> f64, rng: &mut dyn RngCore) -> Result<()> {
        let l: Vec<f64> = self.particles.iter().map(|&x| likelihood(x)).collect();
        let mut w = self.weights.clone();
        reweight(&mut w, &l)?;
        let idx = systematic_indices(&w, rng);
        self.particles = idx.iter().map(|&i| self.particles[i]).collect();
        self.weights = vec![1.0 / idx.len() as f64; idx.len()];
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HypertoroidalParticleFilter {
    particles: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl HypertoroidalParticleFilter {
    pub fn new(n: usize, initial: &dyn HypertoroidalDensity, rng: &mut dyn RngCore) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "need at least one particle"));
        }
        Ok(Self {
            particles: initial.sample(n, rng),
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Equally weighted particles, wrapped into `[0, 2π)`.
    pub fn from_particles(particles: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = particles.first() else {
            return Err(Error::param("particles", "need at least one particle"));
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::param("particles", "particles need at least one coordinate"));
        }
        for p in &particles {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            if let Some(&v) = p.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite(v));
            }
        }
        let n = particles.len();
        Ok(Self {
            particles: particles.into_iter().map(|p| p.into_iter().map(wrap_f64).collect()).collect(),
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn dim(&self) -> usize {
        self.particles[0].len()
    }

    pub fn particles(&self) -> &[Vec<f64>] {
        &self.particles
    }

    pub fn estimate(&self) -> Result<HypertoroidalWD> {
        HypertoroidalWD::new(self.particles.clone(), self.weights.clone())
    }

    pub fn predict(
        &mut self,
        a: &dyn Fn(&[f64]) -> Vec<f64>,
        noise: Option<&dyn HypertoroidalDensity>,
        rng: &mut dyn RngCore,
    ) -> Result<()> {
        let d = self.dim();
        let mut next: Vec<Vec<f64>> = self.particles.iter().map(|x| a(x)).collect();
        if let Some(noise) = noise {
            if noise.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: noise.dim(),
                });
            }
            for (x, w) in next.iter_mut().zip(noise.sample(self.particles.len(), rng)) {
                for (xi, wi) in x.iter_mut().zip(w) {
                    *xi += wi;
                }
            }
        }
        for x in &mut next {
            if x.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: x.len(),
                });
            }
            if let Some(&v) = x.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite(v));
            }
            x.iter_mut().for_each(|v| *v = wrap_f64(*v));
        }
        self.particles = next;
        Ok(())
    }

    pub fn predict_identity(&mut self, noise: &dyn HypertoroidalDensity, rng: &mut dyn RngCore) -> Result<()> {
        self.predict(&|x| x.to_vec(), Some(noise), rng)
    }

    pub fn update(&mut self, likelihood: &dyn Fn(&[f64]) -> f64, rng: &mut dyn RngCore) -> Result<()> {
        let l: Vec<f64> = self.particles.iter().map(|x| likelihood(x)).collect();
        let mut w = self.weights.clone();
        reweight(&mut w, &l)?;
        let idx = systematic_indices(&w, rng);
        self.particles = idx.iter().map(|&i| self.particles[i].clone()).collect();
        self.weights = vec![1.0 / idx.len() as f64; idx.len()];
        Ok(())
    }
}
