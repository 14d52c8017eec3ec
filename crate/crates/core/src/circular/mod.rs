//! Univariate circular distributions on `[0, 2π)`.
//!
//! Every density implements [`CircularDensity`]. Operations with a known
//! closed form (trigonometric moments, cumulative distribution functions,
//! sampling) are overridden per family; everything else falls back to
//! adaptive quadrature. The wrapped Dirac mixture has no density and lives
//! outside the trait.

mod dirac;
mod distribution;
mod misc;
mod ops;
mod von_mises;
mod wrapped;

pub use dirac::{dirac3_from_moment, dirac5_from_moments, WrappedDiracMixture};
pub use distribution::CircularDistribution;
pub use misc::{CircularMixture, CircularUniform, CustomCircular, PiecewiseConstant};
pub use ops::{convolve, fit_vm_from_moment, fit_wn_from_moment, multiply};
pub use von_mises::{GeneralizedVonMises, VonMises};
pub(crate) use misc::simplex;
pub(crate) use von_mises::concentration;
pub(crate) use wrapped::wrap_terms as wrap_terms_for_sigma;
pub use wrapped::{WrappedCauchy, WrappedExponential, WrappedLaplace, WrappedNormal};

use rand::{Rng, RngCore};
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{integrate, Angle, Complex64, TWO_PI};

/// Absolute tolerance used by the numerical fallbacks.
pub const NUMERIC_TOL: f64 = 1e-11;

/// Below this first-moment length the circular mean is reported as undefined.
pub const MEAN_UNDEFINED_BELOW: f64 = 1e-12;

/// Behaviour shared by every circular probability density.
pub trait CircularDensity: fmt::Debug + Send + Sync {
    /// Density at `x` (radians, any real value; interpreted modulo 2π).
    fn pdf(&self, x: f64) -> f64;

    /// Points in `[0, 2π)` where the density may be discontinuous. The
    /// numerical fallbacks split their integration domain there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `E[exp(ikx)]`. Families with a closed form override this.
    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        numerical_moment(self, k)
    }

    /// `E[exp(ikx)]` by quadrature, regardless of any closed form.
    fn trigonometric_moment_numerical(&self, k: i32) -> Complex64 {
        numerical_moment(self, k)
    }

    fn circular_mean(&self) -> Result<Angle> {
        mean_from_moment(self.trigonometric_moment(1))
    }

    fn circular_variance(&self) -> f64 {
        1.0 - self.trigonometric_moment(1).norm()
    }

    /// Differential entropy `−∫ f ln f`.
    fn entropy(&self) -> Result<f64> {
        integrate_density(self, |x| {
            let f = self.pdf(x);
            if f > 0.0 {
                -f * f.ln()
            } else {
                0.0
            }
        })
    }

    /// Probability mass of the counterclockwise arc from `start` to `x`.
    fn cdf(&self, x: f64, start: f64) -> Result<f64> {
        let span = crate::numerics::wrap_f64(x - start);
        if span == 0.0 {
            return Ok(0.0);
        }
        integrate(|t| self.pdf(t), start, start + span, NUMERIC_TOL)
    }

    /// Total mass, which is one for every correctly normalized density.
    fn integral(&self) -> Result<f64> {
        integrate_density(self, |x| self.pdf(x))
    }

    /// `n` independent draws. The default inverts the cumulative
    /// distribution function tabulated on a fine grid.
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        inversion_sample(self, n, rng)
    }

    /// Three equally weighted Dirac components preserving the first
    /// trigonometric moment.
    fn to_dirac3(&self) -> Result<WrappedDiracMixture> {
        dirac3_from_moment(self.trigonometric_moment(1))
    }

    /// Five symmetric Dirac components preserving the first moment and the
    /// magnitude of the second.
    fn to_dirac5(&self) -> Result<WrappedDiracMixture> {
        dirac5_from_moments(self.trigonometric_moment(1), self.trigonometric_moment(2))
    }
}

/// Circular mean `arg m1`, or [`Error::UndefinedMean`] when `|m1|` vanishes.
pub fn mean_from_moment(m1: Complex64) -> Result<Angle> {
    if m1.norm() < MEAN_UNDEFINED_BELOW {
        Err(Error::UndefinedMean)
    } else {
        Ok(Angle::from_complex(m1))
    }
}

/// Integrates `g` over one period, splitting at the density's breakpoints.
pub(crate) fn integrate_density<D, G>(d: &D, g: G) -> Result<f64>
where
    D: CircularDensity + ?Sized,
    G: Fn(f64) -> f64,
{
    let mut cuts = d.breakpoints();
    cuts.push(0.0);
    cuts.push(TWO_PI);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut total = 0.0;
    let pieces = (cuts.len() - 1) as f64;
    for w in cuts.windows(2) {
        total += integrate(&g, w[0], w[1], NUMERIC_TOL / pieces)?;
    }
    Ok(total)
}

pub(crate) fn numerical_moment<D: CircularDensity + ?Sized>(d: &D, k: i32) -> Complex64 {
    let kf = k as f64;
    let best = |r: Result<f64>| r.unwrap_or_else(|e| e.best_estimate().unwrap_or(f64::NAN));
    let re = best(integrate_density(d, |x| d.pdf(x) * (kf * x).cos()));
    let im = best(integrate_density(d, |x| d.pdf(x) * (kf * x).sin()));
    Complex64::new(re, im)
}

const INVERSION_GRID: usize = 4096;

pub(crate) fn inversion_sample<D: CircularDensity + ?Sized>(
    d: &D,
    n: usize,
    rng: &mut dyn RngCore,
) -> Vec<Angle> {
    let h = TWO_PI / INVERSION_GRID as f64;
    // 3-point Gauss–Legendre per cell
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut cdf = Vec::with_capacity(INVERSION_GRID + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for i in 0..INVERSION_GRID {
        let mid = (i as f64 + 0.5) * h;
        let cell: f64 = nodes
            .iter()
            .zip(weights.iter())
            .map(|(x, w)| w * d.pdf(mid + 0.5 * h * x))
            .sum::<f64>()
            * 0.5
            * h;
        acc += cell.max(0.0);
        cdf.push(acc);
    }
    let total = acc;
    (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).clamp(1, INVERSION_GRID);
            let (lo, hi) = (cdf[idx - 1], cdf[idx]);
            let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.5 };
            Angle::wrapped((idx as f64 - 1.0 + frac) * h)
        })
        .collect()
}

/// Generic validation for strictly positive finite parameters.
pub(crate) fn positive(name: &'static str, v: f64) -> Result<f64> {
    if !v.is_finite() {
        Err(Error::param(name, format!("must be finite, got {v}")))
    } else if v <= 0.0 {
        Err(Error::param(name, format!("must be positive, got {v}")))
    } else {
        Ok(v)
    }
}
