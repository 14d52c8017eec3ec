//! Distributions on the hypertorus `[0, 2π)^d`.
//!
//! Points are plain slices of `d` angles. Densities implement
//! [`HypertoroidalDensity`]; the four-dimensional moment summaries and the
//! three toroidal correlation coefficients are computed from trigonometric
//! moments, so they work identically for densities and Dirac mixtures.

mod distribution;
mod fourier;
mod hwd;
mod hwn;
mod misc;
mod tvm;

pub use distribution::HypertoroidalDistribution;
pub use fourier::HypertoroidalFourier;
pub use hwd::HypertoroidalWD;
pub use hwn::HypertoroidalWN;
pub use misc::{CustomHypertoroidal, HypertoroidalMixture, HypertoroidalUniform};
pub use tvm::{ToroidalVMMatrix, ToroidalVMSine};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use rand::{Rng, RngCore};
use std::fmt;
use std::sync::Arc;

use crate::circular::{mean_from_moment, CircularDistribution, CustomCircular};
use crate::error::{Error, Result};
use crate::numerics::{default_tol, integrate_box, integrate_periodic, Angle, Complex64, TWO_PI};

/// Behaviour shared by densities on `[0, 2π)^d`.
pub trait HypertoroidalDensity: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn pdf(&self, x: &[f64]) -> f64;

    /// `E[exp(i k·x)]`.
    fn trigonometric_moment(&self, k: &[i32]) -> Complex64 {
        numerical_moment(self, k)
    }

    fn trigonometric_moment_numerical(&self, k: &[i32]) -> Complex64 {
        numerical_moment(self, k)
    }

    fn integral(&self) -> Result<f64> {
        integrate_periodic(|x| self.pdf(x), self.dim(), default_tol(self.dim()))
    }

    /// `n` draws. The default uses rejection from the uniform distribution
    /// with an envelope found on a grid.
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        rejection_sample(self, n, rng)
    }

    /// Circular mean of every axis.
    fn circular_means(&self) -> Result<Vec<Angle>> {
        let d = self.dim();
        (0..d)
            .map(|i| mean_from_moment(self.trigonometric_moment(&unit(d, i, 1))))
            .collect()
    }
}

pub(crate) fn unit(d: usize, i: usize, v: i32) -> Vec<i32> {
    let mut k = vec![0; d];
    k[i] = v;
    k
}

pub(crate) fn numerical_moment<D: HypertoroidalDensity + ?Sized>(d: &D, k: &[i32]) -> Complex64 {
    let dim = d.dim();
    let tol = default_tol(dim);
    let phase = |x: &[f64]| x.iter().zip(k).map(|(a, &b)| a * b as f64).sum::<f64>();
    let best = |r: Result<f64>| r.unwrap_or_else(|e| e.best_estimate().unwrap_or(f64::NAN));
    let re = best(integrate_periodic(|x| d.pdf(x) * phase(x).cos(), dim, tol));
    let im = best(integrate_periodic(|x| d.pdf(x) * phase(x).sin(), dim, tol));
    Complex64::new(re, im)
}

fn rejection_sample<D: HypertoroidalDensity + ?Sized>(
    d: &D,
    n: usize,
    rng: &mut dyn RngCore,
) -> Vec<Vec<f64>> {
    let dim = d.dim();
    let per_axis: usize = match dim {
        1 => 4096,
        2 => 128,
        _ => 40,
    };
    let total = per_axis.pow(dim as u32);
    let mut x = vec![0.0; dim];
    let mut peak = 0.0f64;
    for idx in 0..total {
        let mut r = idx;
        for xi in x.iter_mut() {
            *xi = (r % per_axis) as f64 * TWO_PI / per_axis as f64;
            r /= per_axis;
        }
        peak = peak.max(d.pdf(&x));
    }
    // margin for peaks between grid nodes
    let bound = 1.5 * peak;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * TWO_PI).collect();
        if rng.random::<f64>() * bound <= d.pdf(&p) {
            out.push(p);
        }
    }
    out
}

/// Trigonometric moment function of a toroidal (d = 2) distribution.
pub(crate) type MomentFn<'a> = &'a dyn Fn(i32, i32) -> Complex64;

/// `E[(cos x₁, sin x₁, cos x₂, sin x₂)]` from trigonometric moments.
pub fn mean4d_from_moments(m: MomentFn) -> Vector4<f64> {
    let a = m(1, 0);
    let b = m(0, 1);
    Vector4::new(a.re, a.im, b.re, b.im)
}

/// Centered second moments of `(cos x₁, sin x₁, cos x₂, sin x₂)` from
/// trigonometric moments of orders up to two.
pub fn covariance4d_from_moments(m: MomentFn) -> Matrix4<f64> {
    let (m20, m02) = (m(2, 0), m(0, 2));
    let (sum, diff) = (m(1, 1), m(1, -1));
    let block = |m2: Complex64| {
        Matrix2::new(
            0.5 * (1.0 + m2.re),
            0.5 * m2.im,
            0.5 * m2.im,
            0.5 * (1.0 - m2.re),
        )
    };
    // rows (cos x₁, sin x₁), columns (cos x₂, sin x₂)
    let cross = Matrix2::new(
        0.5 * (sum.re + diff.re),
        0.5 * (sum.im - diff.im),
        0.5 * (sum.im + diff.im),
        0.5 * (diff.re - sum.re),
    );
    let mut e = Matrix4::zeros();
    e.fixed_view_mut::<2, 2>(0, 0).copy_from(&block(m20));
    e.fixed_view_mut::<2, 2>(2, 2).copy_from(&block(m02));
    e.fixed_view_mut::<2, 2>(0, 2).copy_from(&cross);
    e.fixed_view_mut::<2, 2>(2, 0).copy_from(&cross.transpose());
    let mu = mean4d_from_moments(m);
    e - mu * mu.transpose()
}

/// `E[sin(x₁−μ₁)sin(x₂−μ₂)] / sqrt(E[sin²(x₁−μ₁)]·E[sin²(x₂−μ₂)])`.
pub fn correlation_jammalamadaka_from_moments(m: MomentFn) -> Result<f64> {
    let mu1 = mean_from_moment(m(1, 0))?.value();
    let mu2 = mean_from_moment(m(0, 1))?.value();
    let rot = |z: Complex64, phase: f64| (z * Complex64::from_polar(1.0, -phase)).re;
    let num = 0.5 * (rot(m(1, -1), mu1 - mu2) - rot(m(1, 1), mu1 + mu2));
    let s1 = 0.5 * (1.0 - rot(m(2, 0), 2.0 * mu1));
    let s2 = 0.5 * (1.0 - rot(m(0, 2), 2.0 * mu2));
    let den = (s1 * s2).sqrt();
    if !(den > 0.0) {
        return Err(Error::Degenerate("marginal sine variance vanishes".into()));
    }
    Ok(num / den)
}

fn inv_sqrt_spd(a: Matrix2<f64>) -> Result<Matrix2<f64>> {
    let e = SymmetricEigen::new(a);
    if e.eigenvalues.iter().any(|&v| !(v > 1e-300)) {
        return Err(Error::Degenerate("marginal 2×2 covariance is singular".into()));
    }
    let d = Matrix2::from_diagonal(&e.eigenvalues.map(|v| 1.0 / v.sqrt()));
    Ok(e.eigenvectors * d * e.eigenvectors.transpose())
}

fn blocks(c: &Matrix4<f64>) -> (Matrix2<f64>, Matrix2<f64>, Matrix2<f64>) {
    (
        c.fixed_view::<2, 2>(0, 0).into_owned(),
        c.fixed_view::<2, 2>(0, 2).into_owned(),
        c.fixed_view::<2, 2>(2, 2).into_owned(),
    )
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Johnson–Wehrly coefficient: the largest canonical correlation between
/// `(cos x₁, sin x₁)` and `(cos x₂, sin x₂)`, signed by `det Σ₁₂`.
pub fn correlation_johnson_from_moments(m: MomentFn) -> Result<f64> {
    let (s11, s12, s22) = blocks(&covariance4d_from_moments(m));
    let k = inv_sqrt_spd(s11)? * s12 * inv_sqrt_spd(s22)?;
    let sv = k.singular_values();
    Ok(sign(s12.determinant()) * sv.max())
}

/// Jupp–Mardia coefficient `sign(det Σ₁₂)·sqrt(tr(Σ₁₁⁻¹Σ₁₂Σ₂₂⁻¹Σ₂₁))`,
/// the root of the sum of squared canonical correlations. Not confined to
/// `[−1, 1]`.
pub fn correlation_jupp_from_moments(m: MomentFn) -> Result<f64> {
    let (s11, s12, s22) = blocks(&covariance4d_from_moments(m));
    let i11 = s11
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("marginal covariance singular".into()))?;
    let i22 = s22
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("marginal covariance singular".into()))?;
    let t = (i11 * s12 * i22 * s12.transpose()).trace();
    Ok(sign(s12.determinant()) * t.max(0.0).sqrt())
}

/// Numerical marginal density of axis `dim` (zero-based), integrating the
/// remaining axes.
pub(crate) fn numeric_marginal(
    d: Arc<dyn HypertoroidalDensity>,
    dim: usize,
) -> Result<CircularDistribution> {
    let n = d.dim();
    if dim >= n {
        return Err(Error::param("dimension", format!("axis {dim} out of range for d = {n}")));
    }
    if n == 1 {
        let f = move |x: f64| d.pdf(&[x]);
        return Ok(CustomCircular::new(f, true)?.into());
    }
    let bounds = vec![(0.0, TWO_PI); n - 1];
    let tol = default_tol(n - 1) * 1e-2;
    let f = move |x: f64| {
        let g = |rest: &[f64]| {
            let mut p = Vec::with_capacity(n);
            p.extend_from_slice(&rest[..dim]);
            p.push(x);
            p.extend_from_slice(&rest[dim..]);
            d.pdf(&p)
        };
        integrate_box(g, &bounds, tol).unwrap_or_else(|e| e.best_estimate().unwrap_or(f64::NAN))
    };
    Ok(CustomCircular::new(f, true)?.into())
}

pub(crate) fn check_point(d: usize, x: &[f64]) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_moment_summaries() {
        let m = |a: i32, b: i32| {
            if a == 0 && b == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        assert_eq!(mean4d_from_moments(&m), Vector4::zeros());
        assert!((covariance4d_from_moments(&m) - Matrix4::identity() * 0.5).norm() < 1e-15);
        assert!(correlation_jammalamadaka_from_moments(&m).is_err());
    }
}
