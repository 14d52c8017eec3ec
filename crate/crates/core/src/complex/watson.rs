//! Complex Watson distribution.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{abs_inner_sqr, complex_scatter, unit_complex, ComplexBingham, ComplexSphericalDensity};
use crate::error::{Error, Result};
use crate::numerics::{kummer_1f1_log_derivative, ln_gamma, log_kummer_1f1_elementary, Complex64};

const MAX_KAPPA: f64 = 1e6;

/// `ln c_W(κ)` with `c_W = 2πⁿ/(n−1)! · ₁F₁(1; n; κ)`.
pub fn cw_log_norm(n: usize, kappa: f64) -> f64 {
    let area = (2.0 * PI.powi(n as i32)).ln() - ln_gamma(n as f64);
    if n == 1 {
        return area + kappa;
    }
    area + log_kummer_1f1_elementary(n as u32, kappa)
}

/// `E|zᴴw|²` under concentration `κ`.
fn mean_projection(n: usize, kappa: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    kummer_1f1_log_derivative(n as u32, kappa)
}

/// Density `exp(κ|zᴴw|²) / c_W(κ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CwParams")]
pub struct ComplexWatson {
    w: Vec<Complex64>,
    kappa: f64,
    #[serde(skip)]
    log_norm: f64,
}

#[derive(Deserialize)]
struct CwParams {
    w: Vec<Complex64>,
    kappa: f64,
}

impl TryFrom<CwParams> for ComplexWatson {
    type Error = Error;
    fn try_from(p: CwParams) -> Result<Self> {
        ComplexWatson::new(&p.w, p.kappa)
    }
}

impl ComplexWatson {
    pub fn new(w: &[Complex64], kappa: f64) -> Result<Self> {
        unit_complex("w", w)?;
        if !kappa.is_finite() || kappa.abs() > MAX_KAPPA {
            return Err(Error::param("kappa", format!("must be finite with |kappa| <= {MAX_KAPPA:e}")));
        }
        Ok(Self {
            w: w.to_vec(),
            kappa,
            log_norm: cw_log_norm(w.len(), kappa),
        })
    }

    pub fn w(&self) -> &[Complex64] {
        &self.w
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn log_pdf(&self, z: &[Complex64]) -> f64 {
        self.kappa * abs_inner_sqr(&self.w, z) - self.log_norm
    }

    pub fn to_bingham(&self) -> ComplexBingham {
        let w = DVector::from_column_slice(&self.w);
        ComplexBingham::new((&w * w.adjoint()).scale(self.kappa)).expect("rank-one Hermitian")
    }

    pub fn fit(samples: &[Vec<Complex64>], weights: &[f64]) -> Result<Self> {
        Self::fit_scatter(&complex_scatter(samples, weights)?)
    }

    /// Maximum likelihood: `w` is the principal (for `κ > 0`) or minor
    /// (for `κ < 0`) eigenvector of the scatter matrix, and `κ` solves
    /// `∂ ln c_W/∂κ = wᴴSw`. The better of the two candidates is kept.
    pub fn fit_scatter(s: &DMatrix<Complex64>) -> Result<Self> {
        let n = s.nrows();
        let tr = s.trace().re;
        if n == 0 || s.ncols() != n || !(tr > 0.0) {
            return Err(Error::param("scatter", "must be square with positive trace"));
        }
        let s = (s + s.adjoint()).unscale(2.0 * tr);
        let e = SymmetricEigen::new(s);
        let (mut lo, mut hi) = (0, 0);
        for i in 0..n {
            if e.eigenvalues[i] < e.eigenvalues[lo] {
                lo = i;
            }
            if e.eigenvalues[i] > e.eigenvalues[hi] {
                hi = i;
            }
        }
        if n == 1 {
            return Self::new(&[Complex64::new(1.0, 0.0)], 0.0);
        }
        let mut best: Option<(f64, Self)> = None;
        for idx in [hi, lo] {
            let target = e.eigenvalues[idx];
            let kappa = solve_kappa(n, target)?;
            let w: Vec<Complex64> = e.eigenvectors.column(idx).iter().copied().collect();
            let cand = Self::new(&w, kappa)?;
            let ll = kappa * target - cand.log_norm;
            if best.as_ref().is_none_or(|(b, _)| ll > *b) {
                best = Some((ll, cand));
            }
        }
        Ok(best.expect("two candidates").1)
    }
}

fn solve_kappa(n: usize, target: f64) -> Result<f64> {
    let uniform = 1.0 / n as f64;
    if (target - uniform).abs() < 1e-14 {
        return Ok(0.0);
    }
    if target >= 1.0 - 1e-12 || target <= 1e-12 {
        return Err(Error::Degenerate(format!("projected scatter {target} is at the boundary")));
    }
    let f = |k: f64| mean_projection(n, k) - target;
    let (mut a, mut b) = if target > uniform { (0.0, 1.0) } else { (-1.0, 0.0) };
    while f(b) < 0.0 {
        a = b;
        b *= 2.0;
        if b > MAX_KAPPA {
            return Err(Error::Degenerate("concentration exceeds bound".into()));
        }
    }
    while f(a) > 0.0 {
        b = a;
        a *= 2.0;
        if a < -MAX_KAPPA {
            return Err(Error::Degenerate("concentration exceeds bound".into()));
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-13 * (1.0 + m.abs()) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

impl ComplexSphericalDensity for ComplexWatson {
    fn dim(&self) -> usize {
        self.w.len()
    }

    fn pdf(&self, z: &[Complex64]) -> f64 {
        self.log_pdf(z).exp()
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<Complex64>> {
        self.to_bingham().sample(n, rng)
    }
}
