//! Hypertoroidal wrapped normal distribution.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{
    check_point, correlation_jammalamadaka_from_moments, correlation_johnson_from_moments,
    correlation_jupp_from_moments, covariance4d_from_moments, mean4d_from_moments, unit,
    HypertoroidalDensity, HypertoroidalWD,
};
use crate::circular::{CircularDistribution, WrappedNormal};
use crate::error::{Error, Result};
use crate::numerics::{default_tol, integrate_periodic, wrap, wrap_f64, Angle, Complex64, TWO_PI};

/// Gaussian on `R^d` wrapped along every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HwnParams", into = "HwnParams")]
pub struct HypertoroidalWN {
    mu: Vec<Angle>,
    c: DMatrix<f64>,
    c_inv: DMatrix<f64>,
    log_norm: f64,
    terms: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct HwnParams {
    mu: Vec<f64>,
    c: Vec<Vec<f64>>,
}

impl TryFrom<HwnParams> for HypertoroidalWN {
    type Error = Error;
    fn try_from(p: HwnParams) -> Result<Self> {
        let d = p.mu.len();
        if p.c.len() != d || p.c.iter().any(|r| r.len() != d) {
            return Err(Error::param("c", "must be a d×d matrix matching mu"));
        }
        let c = DMatrix::from_fn(d, d, |i, j| p.c[i][j]);
        HypertoroidalWN::new(p.mu, c)
    }
}

impl From<HypertoroidalWN> for HwnParams {
    fn from(h: HypertoroidalWN) -> Self {
        let d = h.dim();
        HwnParams {
            mu: h.mu.iter().map(|a| a.value()).collect(),
            c: (0..d).map(|i| (0..d).map(|j| h.c[(i, j)]).collect()).collect(),
        }
    }
}

impl HypertoroidalWN {
    pub fn new(mu: Vec<f64>, c: DMatrix<f64>) -> Result<Self> {
        let d = mu.len();
        if d == 0 {
            return Err(Error::param("mu", "must not be empty"));
        }
        if c.nrows() != d || c.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.nrows(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("c", "non-finite entry"));
        }
        let scale = c.amax().max(1.0);
        if (&c - c.transpose()).amax() > 1e-12 * scale {
            return Err(Error::param("c", "must be symmetric"));
        }
        let c = (&c + c.transpose()) * 0.5;
        let chol = Cholesky::new(c.clone())
            .ok_or_else(|| Error::param("c", "must be positive definite"))?;
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let c_inv = chol.inverse();
        let terms = (0..d)
            .map(|i| crate::circular::wrap_terms_for_sigma(c[(i, i)].sqrt()))
            .collect();
        Ok(Self {
            mu: mu.into_iter().map(wrap).collect::<Result<Vec<_>>>()?,
            log_norm: 0.5 * (d as f64 * (2.0 * PI).ln() + log_det),
            c,
            c_inv,
            terms,
        })
    }

    pub fn mu(&self) -> &[Angle] {
        &self.mu
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    fn mu_vec(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.mu.iter().map(|a| a.value()))
    }

    /// Density with an explicit number of wrap offsets per side on every axis.
    pub fn pdf_with_terms(&self, x: &[f64], terms: &[i64]) -> f64 {
        let d = self.dim();
        let base: Vec<f64> = (0..d).map(|i| wrap_f64(x[i]) - self.mu[i].value()).collect();
        let mut offset: Vec<i64> = terms.iter().map(|k| -k).collect();
        let mut y = DVector::zeros(d);
        let mut sum = 0.0;
        loop {
            for i in 0..d {
                y[i] = base[i] + TWO_PI * offset[i] as f64;
            }
            sum += (-0.5 * (&self.c_inv * &y).dot(&y)).exp();
            // odometer increment over the offset lattice
            let mut i = 0;
            loop {
                if i == d {
                    return sum * (-self.log_norm).exp();
                }
                offset[i] += 1;
                if offset[i] <= terms[i] {
                    break;
                }
                offset[i] = -terms[i];
                i += 1;
            }
        }
    }

    /// Exact convolution: means and covariances add.
    pub fn convolve(&self, other: &HypertoroidalWN) -> Result<HypertoroidalWN> {
        self.same_dim(other.dim())?;
        HypertoroidalWN::new((self.mu_vec() + other.mu_vec()).iter().copied().collect(), &self.c + &other.c)
    }

    fn same_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d,
            });
        }
        Ok(())
    }

    /// Fit from a moment function: axis moments give `μ_i` and `C_ii`, the
    /// sum and difference moments of each axis pair give `C_ij`.
    pub fn from_moments(d: usize, m: impl Fn(&[i32]) -> Complex64) -> Result<HypertoroidalWN> {
        let mut mu = vec![0.0; d];
        let mut c = DMatrix::zeros(d, d);
        for i in 0..d {
            let mi = m(&unit(d, i, 1));
            let r = mi.norm();
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Inadmissible(format!("axis {i} moment length {r}")));
            }
            mu[i] = mi.arg();
            c[(i, i)] = -2.0 * r.ln();
        }
        for i in 0..d {
            for j in i + 1..d {
                let mut kp = vec![0; d];
                kp[i] = 1;
                kp[j] = 1;
                let mut km = kp.clone();
                km[j] = -1;
                let (p, q) = (m(&kp).norm(), m(&km).norm());
                if !(p > 0.0 && q > 0.0) {
                    return Err(Error::Inadmissible("vanishing pair moment".into()));
                }
                let cij = 0.5 * (q.ln() - p.ln());
                c[(i, j)] = cij;
                c[(j, i)] = cij;
            }
        }
        HypertoroidalWN::new(mu, c)
    }

    /// Moment-matched product, with the product's moments computed by
    /// quadrature (d ≤ 3).
    pub fn multiply(&self, other: &HypertoroidalWN) -> Result<HypertoroidalWN> {
        self.same_dim(other.dim())?;
        let d = self.dim();
        let tol = default_tol(d) * 1e-2;
        let f = |x: &[f64]| self.pdf(x) * other.pdf(x);
        let z = integrate_periodic(f, d, tol)?;
        if !(z > 0.0) {
            return Err(Error::Degenerate("product has no mass".into()));
        }
        let moment = |k: &[i32]| {
            let ph = |x: &[f64]| x.iter().zip(k).map(|(a, &b)| a * b as f64).sum::<f64>();
            let re = integrate_periodic(|x| f(x) * ph(x).cos(), d, tol);
            let im = integrate_periodic(|x| f(x) * ph(x).sin(), d, tol);
            match (re, im) {
                (Ok(re), Ok(im)) => Complex64::new(re, im) / z,
                _ => Complex64::new(f64::NAN, f64::NAN),
            }
        };
        HypertoroidalWN::from_moments(d, moment)
    }

    /// Marginal of axis `dim` (zero-based): `WN(μ_i, sqrt(C_ii))`.
    pub fn marginalize_to_1d(&self, dim: usize) -> Result<CircularDistribution> {
        if dim >= self.dim() {
            return Err(Error::param("dimension", "axis out of range"));
        }
        Ok(WrappedNormal::new(self.mu[dim].value(), self.c[(dim, dim)].sqrt())?.into())
    }

    /// Deterministic product Gauss–Hermite points of the given order per
    /// axis (3 or 5), mapped through the Cholesky factor of `C`.
    pub fn to_dirac_gauss_hermite(&self, order: usize) -> Result<HypertoroidalWD> {
        let (nodes, weights): (Vec<f64>, Vec<f64>) = match order {
            3 => (vec![-3f64.sqrt(), 0.0, 3f64.sqrt()], vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]),
            5 => {
                // probabilists' nodes ±sqrt(5 ± sqrt(10)) with their weights
                let a = (5.0 - 10f64.sqrt()).sqrt();
                let b = (5.0 + 10f64.sqrt()).sqrt();
                let wa = (7.0 + 2.0 * 10f64.sqrt()) / 60.0;
                let wb = (7.0 - 2.0 * 10f64.sqrt()) / 60.0;
                (vec![-b, -a, 0.0, a, b], vec![wb, wa, 8.0 / 15.0, wa, wb])
            }
            _ => return Err(Error::param("order", "Gauss–Hermite order must be 3 or 5")),
        };
        let d = self.dim();
        let l = Cholesky::<f64, Dyn>::new(self.c.clone()).expect("validated").l();
        let total = order.pow(d as u32);
        let mut points = Vec::with_capacity(total);
        let mut w = Vec::with_capacity(total);
        let mu = self.mu_vec();
        for idx in 0..total {
            let mut r = idx;
            let mut z = DVector::zeros(d);
            let mut wt = 1.0;
            for i in 0..d {
                z[i] = nodes[r % order];
                wt *= weights[r % order];
                r /= order;
            }
            let x = &mu + &l * z;
            points.push(x.iter().copied().collect::<Vec<f64>>());
            w.push(wt);
        }
        HypertoroidalWD::new(points, w)
    }

    pub fn mean4d(&self) -> Result<nalgebra::Vector4<f64>> {
        Ok(mean4d_from_moments(&self.moment2()?))
    }

    pub fn covariance4d(&self) -> Result<nalgebra::Matrix4<f64>> {
        Ok(covariance4d_from_moments(&self.moment2()?))
    }

    pub fn correlation_jammalamadaka(&self) -> Result<f64> {
        correlation_jammalamadaka_from_moments(&self.moment2()?)
    }

    pub fn correlation_johnson(&self) -> Result<f64> {
        correlation_johnson_from_moments(&self.moment2()?)
    }

    pub fn correlation_jupp(&self) -> Result<f64> {
        correlation_jupp_from_moments(&self.moment2()?)
    }

    fn moment2(&self) -> Result<impl Fn(i32, i32) -> Complex64 + '_> {
        if self.dim() != 2 {
            return Err(Error::Unsupported("four-dimensional summaries need d = 2".into()));
        }
        Ok(move |a: i32, b: i32| self.trigonometric_moment(&[a, b]))
    }
}

impl HypertoroidalDensity for HypertoroidalWN {
    fn dim(&self) -> usize {
        self.mu.len()
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        debug_assert!(check_point(self.dim(), x).is_ok());
        self.pdf_with_terms(x, &self.terms)
    }

    fn trigonometric_moment(&self, k: &[i32]) -> Complex64 {
        let kv = DVector::from_iterator(self.dim(), k.iter().map(|&v| v as f64));
        let phase = kv.dot(&self.mu_vec());
        let q = (&self.c * &kv).dot(&kv);
        Complex64::from_polar((-0.5 * q).exp(), phase)
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let d = self.dim();
        let l = Cholesky::<f64, Dyn>::new(self.c.clone()).expect("validated").l();
        let mu = self.mu_vec();
        (0..n)
            .map(|_| {
                let z = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(rng)));
                (&mu + &l * z).iter().map(|&v| wrap_f64(v)).collect()
            })
            .collect()
    }
}
