//! Mixtures of complex Watson distributions and their EM fit.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{abs_inner_sqr, ComplexSphericalDensity, ComplexWatson};
use crate::circular::simplex;
use crate::error::{Error, Result};
use crate::numerics::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureParams")]
pub struct ComplexWatsonMixture {
    weights: Vec<f64>,
    components: Vec<ComplexWatson>,
}

#[derive(Deserialize)]
struct MixtureParams {
    weights: Vec<f64>,
    components: Vec<ComplexWatson>,
}

impl TryFrom<MixtureParams> for ComplexWatsonMixture {
    type Error = Error;
    fn try_from(p: MixtureParams) -> Result<Self> {
        ComplexWatsonMixture::new(p.components, p.weights)
    }
}

/// Outcome of [`ComplexWatsonMixture::fit_em`].
#[derive(Debug, Clone)]
pub struct EmResult {
    pub mixture: ComplexWatsonMixture,
    /// Log-likelihood after each iteration.
    pub loglik: Vec<f64>,
    pub converged: bool,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl ComplexWatsonMixture {
    pub fn new(components: Vec<ComplexWatson>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::param("components", "need at least one"));
        }
        if components.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: components.len(),
                found: weights.len(),
            });
        }
        let n = components[0].dim();
        if let Some(c) = components.iter().find(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c.dim(),
            });
        }
        Ok(Self {
            weights: simplex("weights", &weights, false)?,
            components,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ComplexWatson] {
        &self.components
    }

    fn log_joint(&self, z: &[Complex64]) -> Vec<f64> {
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, &w)| if w > 0.0 { w.ln() + c.log_pdf(z) } else { f64::NEG_INFINITY })
            .collect()
    }

    pub fn log_pdf(&self, z: &[Complex64]) -> f64 {
        log_sum_exp(&self.log_joint(z))
    }

    pub fn log_likelihood(&self, samples: &[Vec<Complex64>]) -> f64 {
        samples.iter().map(|z| self.log_pdf(z)).sum()
    }

    /// Expectation maximization with `k` components. Initial hard
    /// assignments come from k-means++ seeding on `1 − |z_jᴴz_l|²`. Stops
    /// when the log-likelihood gains less than `tol` or after `max_iter`
    /// iterations.
    pub fn fit_em(samples: &[Vec<Complex64>], k: usize, seed: u64, max_iter: usize, tol: f64) -> Result<EmResult> {
        if k == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        if samples.len() < k {
            return Err(Error::param("samples", format!("need at least {k}, found {}", samples.len())));
        }
        let m = samples.len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let affinity = |a: &[Complex64], b: &[Complex64]| 1.0 - abs_inner_sqr(a, b);

        let mut centers = vec![rng.random_range(0..m)];
        let mut dist: Vec<f64> = samples.iter().map(|z| affinity(z, &samples[centers[0]])).collect();
        while centers.len() < k {
            let w: Vec<f64> = dist.iter().map(|d| d * d).collect();
            let next = match WeightedIndex::new(&w) {
                Ok(idx) => idx.sample(&mut rng),
                Err(_) => rng.random_range(0..m),
            };
            centers.push(next);
            for (d, z) in dist.iter_mut().zip(samples) {
                *d = d.min(affinity(z, &samples[next]));
            }
        }
        let mut resp: Vec<Vec<f64>> = samples
            .iter()
            .map(|z| {
                let best = (0..k)
                    .min_by(|&a, &b| affinity(z, &samples[centers[a]]).total_cmp(&affinity(z, &samples[centers[b]])))
                    .unwrap();
                (0..k).map(|j| if j == best { 1.0 } else { 0.0 }).collect()
            })
            .collect();

        let mut loglik = Vec::new();
        let mut mixture;
        let mut converged = false;
        let mut iter = 0;
        loop {
            // M-step
            let mut comps = Vec::with_capacity(k);
            let mut weights = Vec::with_capacity(k);
            for j in 0..k {
                let w: Vec<f64> = resp.iter().map(|r| r[j]).collect();
                let mass: f64 = w.iter().sum();
                if w.iter().all(|&r| r < 1e-12) {
                    // reseed from the sample the current fit explains worst
                    let worst = worst_sample(&resp);
                    comps.push(ComplexWatson::new(&samples[worst], 1.0)?);
                    weights.push(1.0 / m as f64);
                    continue;
                }
                comps.push(ComplexWatson::fit(samples, &w)?);
                weights.push(mass / m as f64);
            }
            mixture = Self::new(comps, weights)?;

            // E-step
            let mut ll = 0.0;
            for (z, r) in samples.iter().zip(resp.iter_mut()) {
                let lj = mixture.log_joint(z);
                let lse = log_sum_exp(&lj);
                ll += lse;
                for (rj, l) in r.iter_mut().zip(&lj) {
                    *rj = (l - lse).exp();
                }
            }
            let gain = loglik.last().map(|prev| ll - prev);
            loglik.push(ll);
            iter += 1;
            if gain.is_some_and(|g| g.abs() < tol) {
                converged = true;
                break;
            }
            if iter >= max_iter {
                break;
            }
        }
        Ok(EmResult {
            mixture,
            loglik,
            converged,
        })
    }
}

/// The sample whose largest responsibility is smallest.
fn worst_sample(resp: &[Vec<f64>]) -> usize {
    (0..resp.len())
        .min_by(|&a, &b| {
            let ma = resp[a].iter().cloned().fold(0.0, f64::max);
            let mb = resp[b].iter().cloned().fold(0.0, f64::max);
            ma.total_cmp(&mb)
        })
        .unwrap_or(0)
}

impl ComplexSphericalDensity for ComplexWatsonMixture {
    fn dim(&self) -> usize {
        self.components[0].dim()
    }

    fn pdf(&self, z: &[Complex64]) -> f64 {
        self.log_pdf(z).exp()
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<Complex64>> {
        let idx = WeightedIndex::new(&self.weights).expect("validated weights");
        let mut counts = vec![0; self.components.len()];
        for _ in 0..n {
            counts[idx.sample(rng)] += 1;
        }
        let mut out = Vec::with_capacity(n);
        for (c, &k) in self.components.iter().zip(&counts) {
            out.extend(c.sample(k, rng));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn normalized(v: &[(f64, f64)]) -> Vec<Complex64> {
        let z: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        z.iter().map(|c| c / n).collect()
    }

    pub(crate) fn shape_modes() -> (Vec<Complex64>, Vec<Complex64>) {
        (
            normalized(&[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]),
            normalized(&[(1.0, 0.1), (-1.0, 0.1), (-1.0, -0.1), (1.0, -0.1)]),
        )
    }

    #[test]
    fn single_component_equals_direct_fit() {
        let (w1, _) = shape_modes();
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let s = ComplexWatson::new(&w1, 30.0).unwrap().sample(2000, &mut rng);
        let em = ComplexWatsonMixture::fit_em(&s, 1, 1, 50, 1e-9).unwrap();
        let direct = ComplexWatson::fit(&s, &vec![1.0; s.len()]).unwrap();
        let c = &em.mixture.components()[0];
        assert!((c.kappa() - direct.kappa()).abs() < 1e-9);
        assert!(abs_inner_sqr(c.w(), direct.w()) > 1.0 - 1e-12);
    }

    #[test]
    fn recovers_two_shape_modes() {
        let (w1, w2) = shape_modes();
        let truth = ComplexWatsonMixture::new(
            vec![ComplexWatson::new(&w1, 100.0).unwrap(), ComplexWatson::new(&w2, 100.0).unwrap()],
            vec![0.5, 0.5],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let s = truth.sample(1000, &mut rng);
        let em = ComplexWatsonMixture::fit_em(&s, 2, 7, 200, 1e-8).unwrap();
        for pair in em.loglik.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-8 * pair[0].abs());
        }
        for w in [&w1, &w2] {
            let best = em
                .mixture
                .components()
                .iter()
                .map(|c| abs_inner_sqr(c.w(), w).sqrt())
                .fold(0.0, f64::max);
            assert!(best >= 0.99);
        }
    }
}
