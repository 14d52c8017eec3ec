//! Adaptive composite Gauss–Legendre quadrature on boxes, tori and spheres.
//!
//! Each panel is integrated with a 15-point Gauss–Legendre rule and compared
//! against the sum over its two halves; panels are bisected until the two
//! estimates agree to the panel's share of the tolerance. Multidimensional
//! integrals nest the one-dimensional scheme axis by axis.

use std::cell::Cell;
use std::f64::consts::PI;
use std::sync::OnceLock;

use super::TWO_PI;
use crate::error::{Error, Result};

const ORDER: usize = 15;
const MAX_DEPTH: u32 = 30;
const MAX_DIM: usize = 8;

fn gauss_legendre() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        s += w * f(mid + half * x);
    }
    s * half
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    failed: &Cell<bool>,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m);
    let right = panel(f, m, b);
    let sum = left + right;
    let diff = (sum - whole).abs();
    if diff <= tol.max(1e-15 * sum.abs()) || !sum.is_finite() {
        return sum;
    }
    if depth >= MAX_DEPTH {
        failed.set(true);
        return sum;
    }
    adapt(f, a, m, left, 0.5 * tol, depth + 1, failed)
        + adapt(f, m, b, right, 0.5 * tol, depth + 1, failed)
}

fn integrate_flagged<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    panels: usize,
    failed: &Cell<bool>,
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = a + h * i as f64;
        let hi = if i + 1 == panels { b } else { lo + h };
        let whole = panel(f, lo, hi);
        total += adapt(f, lo, hi, whole, tol / panels as f64, 0, failed);
    }
    total
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let failed = Cell::new(false);
    let v = integrate_flagged(&f, a, b, tol, 8, &failed);
    if failed.get() || !v.is_finite() {
        Err(Error::NonConvergence { estimate: v })
    } else {
        Ok(v)
    }
}

fn nested(
    f: &dyn Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    prefix: &[f64],
    tol: f64,
    failed: &Cell<bool>,
) -> f64 {
    let axis = prefix.len();
    let (a, b) = bounds[axis];
    let panels = if bounds.len() == 1 { 8 } else { 3 };
    let with = |x: f64| {
        let mut p = [0.0; MAX_DIM];
        p[..axis].copy_from_slice(prefix);
        p[axis] = x;
        p
    };
    if axis + 1 == bounds.len() {
        let g = |x: f64| f(&with(x)[..=axis]);
        return integrate_flagged(&g, a, b, tol, panels, failed);
    }
    let inner_tol = 0.5 * tol / (b - a).max(1e-300);
    let g = |x: f64| nested(f, bounds, &with(x)[..=axis], inner_tol, failed);
    integrate_flagged(&g, a, b, 0.5 * tol, panels, failed)
}

/// Integrates a function of `bounds.len()` variables over a box.
pub fn integrate_box<F: Fn(&[f64]) -> f64>(f: F, bounds: &[(f64, f64)], tol: f64) -> Result<f64> {
    if bounds.is_empty() {
        return Err(Error::param("bounds", "at least one axis required"));
    }
    if bounds.len() > MAX_DIM {
        return Err(Error::Unsupported(format!("at most {MAX_DIM} axes")));
    }
    let failed = Cell::new(false);
    let v = nested(&f, bounds, &[], tol, &failed);
    if failed.get() || !v.is_finite() {
        Err(Error::NonConvergence { estimate: v })
    } else {
        Ok(v)
    }
}

/// Default absolute tolerance for `d`-dimensional periodic integrals.
pub fn default_tol(d: usize) -> f64 {
    match d {
        0 | 1 => 1e-10,
        2 => 1e-8,
        _ => 1e-6,
    }
}

/// Integrates `f` over `[0, 2π)^d` for `d ∈ {1, 2, 3}`.
pub fn integrate_periodic<F: Fn(&[f64]) -> f64>(f: F, d: usize, tol: f64) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::Unsupported(format!(
            "periodic quadrature supports d in 1..=3, got {d}"
        )));
    }
    if tol <= 0.0 {
        return Err(Error::param("tol", "must be positive"));
    }
    let bounds = vec![(0.0, TWO_PI); d];
    integrate_box(f, &bounds, tol)
}

/// Surface area of the unit sphere `S^{d-1}` embedded in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / super::ln_gamma(h).exp()
}

/// Integrates `f` over the unit sphere `S^{d-1} ⊂ R^d` for `d ∈ {2, 3, 4}`
/// using hyperspherical coordinates.
pub fn integrate_sphere<F: Fn(&[f64]) -> f64>(f: F, d: usize, tol: f64) -> Result<f64> {
    match d {
        2 => integrate(|t| f(&[t.cos(), t.sin()]), 0.0, TWO_PI, tol),
        3 => integrate_box(
            |p| {
                let (st, ct) = p[0].sin_cos();
                let (sp, cp) = p[1].sin_cos();
                f(&[st * cp, st * sp, ct]) * st
            },
            &[(0.0, PI), (0.0, TWO_PI)],
            tol,
        ),
        4 => integrate_box(
            |p| {
                let (sp, cp) = p[0].sin_cos();
                let (st, ct) = p[1].sin_cos();
                let (sf, cf) = p[2].sin_cos();
                f(&[sp * st * cf, sp * st * sf, sp * ct, cp]) * sp * sp * st
            },
            &[(0.0, PI), (0.0, PI), (0.0, TWO_PI)],
            tol,
        ),
        _ => Err(Error::Unsupported(format!(
            "sphere quadrature supports d in 2..=4, got {d}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        // degree 2·15−1 = 29 is exact on one panel
        let v = panel(&|x: f64| x.powi(28), -1.0, 1.0);
        assert!((v - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_and_cos_squared() {
        let u = integrate_periodic(|_| 1.0 / TWO_PI, 1, 1e-10).unwrap();
        assert!((u - 1.0).abs() < 1e-12);
        let c = integrate_periodic(|x| x[0].cos().powi(2) / PI, 1, 1e-10).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn von_mises_normalizes() {
        // I0(0.5) from its power series
        let i0: f64 = (0..30)
            .map(|j| 0.0625f64.powi(j) / ((1..=j).map(|k| k as f64).product::<f64>().powi(2)))
            .sum();
        let f = |x: &[f64]| (0.5 * (x[0] - 6.0).cos()).exp() / (TWO_PI * i0);
        let v = integrate_periodic(f, 1, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_and_three_dimensional() {
        let v2 = integrate_periodic(|x| (x[0].cos() * x[1].sin()).exp() / (TWO_PI * TWO_PI), 2, 1e-8)
            .unwrap();
        // ∫∫ exp(cos a sin b) = 4π² · Σ (1/(k!)^2 /4^k)^2·... check via separable identity
        // E_b[I0(sin b)] where a is integrated first: ∫ exp(c cos a) da = 2π I0(c)
        let inner = |c: f64| -> f64 {
            (0..40)
                .map(|j| (c * c / 4.0).powi(j) / (1..=j).map(|k| k as f64).product::<f64>().powi(2))
                .sum()
        };
        let expect = integrate(|b| inner(b.sin()), 0.0, TWO_PI, 1e-12).unwrap() / TWO_PI;
        assert!((v2 - expect).abs() < 1e-8);
        let v3 = integrate_periodic(|_| 1.0, 3, 1e-6).unwrap();
        assert!((v3 - TWO_PI.powi(3)).abs() < 1e-6);
        assert!(integrate_periodic(|_| 1.0, 4, 1e-6).is_err());
    }

    #[test]
    fn sphere_areas() {
        for d in 2..=4 {
            let v = integrate_sphere(|_| 1.0, d, 1e-9).unwrap();
            assert!((v - sphere_area(d)).abs() < 1e-8, "d={d}");
        }
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_carries_estimate() {
        let err = integrate(|x| if x > 0.3 { 1.0 / (x - 0.3).sqrt() } else { 0.0 }, 0.0, 1.0, 1e-14)
            .unwrap_err();
        assert!(err.best_estimate().is_some());
    }
}
