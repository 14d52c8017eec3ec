//! Bivariate von Mises distributions on the torus, sine and matrix versions.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::HypertoroidalDensity;
use crate::circular::concentration;
use crate::error::{Error, Result};
use crate::numerics::{default_tol, integrate_periodic, wrap, Angle};

fn log_normalizer(exponent: impl Fn(&[f64]) -> f64, shift: f64) -> Result<f64> {
    let z = integrate_periodic(|x| (exponent(x) - shift).exp(), 2, default_tol(2) * 1e-3)?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Degenerate(format!("normalization integral {z}")));
    }
    Ok(shift + z.ln())
}

fn check_pair(name: &'static str, v: &[f64]) -> Result<()> {
    if v.len() != 2 {
        return Err(Error::param(name, format!("needs 2 entries, got {}", v.len())));
    }
    Ok(())
}

/// Density proportional to
/// `exp(κ₁cos(x₁−μ₁) + κ₂cos(x₂−μ₂) + λ sin(x₁−μ₁)sin(x₂−μ₂))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SineParams")]
pub struct ToroidalVMSine {
    mu: [Angle; 2],
    kappa: [f64; 2],
    lambda: f64,
    #[serde(skip_serializing)]
    log_norm: f64,
}

#[derive(Deserialize)]
struct SineParams {
    mu: Vec<f64>,
    kappa: Vec<f64>,
    lambda: f64,
}

impl TryFrom<SineParams> for ToroidalVMSine {
    type Error = Error;
    fn try_from(p: SineParams) -> Result<Self> {
        check_pair("mu", &p.mu)?;
        check_pair("kappa", &p.kappa)?;
        ToroidalVMSine::new([p.mu[0], p.mu[1]], [p.kappa[0], p.kappa[1]], p.lambda)
    }
}

impl ToroidalVMSine {
    pub fn new(mu: [f64; 2], kappa: [f64; 2], lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::param("lambda", "must be finite"));
        }
        let mut d = Self {
            mu: [wrap(mu[0])?, wrap(mu[1])?],
            kappa: [concentration("kappa", kappa[0])?, concentration("kappa", kappa[1])?],
            lambda,
            log_norm: 0.0,
        };
        let shift = d.kappa[0] + d.kappa[1] + lambda.abs();
        d.log_norm = log_normalizer(|x| d.exponent(x), shift)?;
        Ok(d)
    }

    fn exponent(&self, x: &[f64]) -> f64 {
        let a = x[0] - self.mu[0].value();
        let b = x[1] - self.mu[1].value();
        self.kappa[0] * a.cos() + self.kappa[1] * b.cos() + self.lambda * a.sin() * b.sin()
    }

    pub fn mu(&self) -> [Angle; 2] {
        self.mu
    }

    pub fn kappa(&self) -> [f64; 2] {
        self.kappa
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl HypertoroidalDensity for ToroidalVMSine {
    fn dim(&self) -> usize {
        2
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        (self.exponent(x) - self.log_norm).exp()
    }
}

fn rot(t: f64) -> Matrix2<f64> {
    let (s, c) = t.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Density proportional to `exp(κ₁cos(x₁−μ₁) + κ₂cos(x₂−μ₂) + u₁ᵀ A u₂)`
/// with `u_i = (cos(x_i−μ_i), sin(x_i−μ_i))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixParams", into = "MatrixParams")]
pub struct ToroidalVMMatrix {
    mu: [Angle; 2],
    kappa: [f64; 2],
    a: Matrix2<f64>,
    log_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct MatrixParams {
    mu: Vec<f64>,
    kappa: Vec<f64>,
    a: Vec<Vec<f64>>,
}

impl TryFrom<MatrixParams> for ToroidalVMMatrix {
    type Error = Error;
    fn try_from(p: MatrixParams) -> Result<Self> {
        check_pair("mu", &p.mu)?;
        check_pair("kappa", &p.kappa)?;
        if p.a.len() != 2 || p.a.iter().any(|r| r.len() != 2) {
            return Err(Error::param("a", "must be 2×2"));
        }
        let a = Matrix2::new(p.a[0][0], p.a[0][1], p.a[1][0], p.a[1][1]);
        ToroidalVMMatrix::new([p.mu[0], p.mu[1]], [p.kappa[0], p.kappa[1]], a)
    }
}

impl From<ToroidalVMMatrix> for MatrixParams {
    fn from(t: ToroidalVMMatrix) -> Self {
        MatrixParams {
            mu: t.mu.iter().map(|m| m.value()).collect(),
            kappa: t.kappa.to_vec(),
            a: vec![vec![t.a[(0, 0)], t.a[(0, 1)]], vec![t.a[(1, 0)], t.a[(1, 1)]]],
        }
    }
}

impl ToroidalVMMatrix {
    pub fn new(mu: [f64; 2], kappa: [f64; 2], a: Matrix2<f64>) -> Result<Self> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("a", "non-finite entry"));
        }
        let mut d = Self {
            mu: [wrap(mu[0])?, wrap(mu[1])?],
            kappa: [concentration("kappa", kappa[0])?, concentration("kappa", kappa[1])?],
            a,
            log_norm: 0.0,
        };
        let shift = d.kappa[0] + d.kappa[1] + a.abs().sum();
        d.log_norm = log_normalizer(|x| d.exponent(x), shift)?;
        Ok(d)
    }

    fn exponent(&self, x: &[f64]) -> f64 {
        let a = x[0] - self.mu[0].value();
        let b = x[1] - self.mu[1].value();
        let u1 = Vector2::new(a.cos(), a.sin());
        let u2 = Vector2::new(b.cos(), b.sin());
        self.kappa[0] * u1[0] + self.kappa[1] * u2[0] + u1.dot(&(self.a * u2))
    }

    pub fn mu(&self) -> [Angle; 2] {
        self.mu
    }

    pub fn kappa(&self) -> [f64; 2] {
        self.kappa
    }

    pub fn a(&self) -> Matrix2<f64> {
        self.a
    }

    /// Exponent written as `a₁ᵀv₁ + a₂ᵀv₂ + v₁ᵀBv₂` with
    /// `v_i = (cos x_i, sin x_i)`.
    fn uncentered(&self) -> (Vector2<f64>, Vector2<f64>, Matrix2<f64>) {
        let (m1, m2) = (self.mu[0].value(), self.mu[1].value());
        let a1 = Vector2::new(m1.cos(), m1.sin()) * self.kappa[0];
        let a2 = Vector2::new(m2.cos(), m2.sin()) * self.kappa[1];
        (a1, a2, rot(m1) * self.a * rot(m2).transpose())
    }

    /// Exact product: the uncentered linear and bilinear terms add.
    pub fn multiply(&self, other: &ToroidalVMMatrix) -> Result<ToroidalVMMatrix> {
        let (a1, a2, b) = self.uncentered();
        let (c1, c2, d) = other.uncentered();
        let (s1, s2, bb) = (a1 + c1, a2 + c2, b + d);
        let angle = |v: Vector2<f64>| if v.norm() > 0.0 { v[1].atan2(v[0]) } else { 0.0 };
        let (m1, m2) = (angle(s1), angle(s2));
        let a = rot(m1).transpose() * bb * rot(m2);
        ToroidalVMMatrix::new([m1, m2], [s1.norm(), s2.norm()], a)
    }
}

impl HypertoroidalDensity for ToroidalVMMatrix {
    fn dim(&self) -> usize {
        2
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        (self.exponent(x) - self.log_norm).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::TWO_PI;

    #[test]
    fn both_versions_normalize() {
        let s = ToroidalVMSine::new([1.0, 2.0], [1.5, 0.7], 0.9).unwrap();
        assert!((s.integral().unwrap() - 1.0).abs() < 1e-7);
        let m = ToroidalVMMatrix::new([1.0, 2.0], [1.5, 0.7], Matrix2::new(0.3, -0.2, 0.5, 0.1)).unwrap();
        assert!((m.integral().unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn sine_without_coupling_factorizes() {
        use crate::circular::{CircularDensity, VonMises};
        let s = ToroidalVMSine::new([1.0, 2.0], [1.5, 0.7], 0.0).unwrap();
        let (a, b) = (VonMises::new(1.0, 1.5).unwrap(), VonMises::new(2.0, 0.7).unwrap());
        for x in [[0.2, 0.3], [4.0, 5.0]] {
            assert!((s.pdf(&x) - a.pdf(x[0]) * b.pdf(x[1])).abs() < 1e-9);
        }
    }

    #[test]
    fn matrix_multiplication_is_exact() {
        let p = ToroidalVMMatrix::new([1.0, 2.0], [1.5, 0.7], Matrix2::new(0.3, -0.2, 0.5, 0.1)).unwrap();
        let q = ToroidalVMMatrix::new([4.0, 0.5], [0.4, 2.0], Matrix2::new(-0.6, 0.1, 0.0, 0.4)).unwrap();
        let r = p.multiply(&q).unwrap();
        let n = 100;
        let h = TWO_PI / n as f64;
        let mut z = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = [i as f64 * h, j as f64 * h];
                z += p.pdf(&x) * q.pdf(&x) * h * h;
            }
        }
        for x in [[0.1, 0.2], [2.0, 5.0], [5.5, 3.3]] {
            assert!((p.pdf(&x) * q.pdf(&x) / z - r.pdf(&x)).abs() < 1e-9 * r.pdf(&x).max(1.0));
        }
        let flat = ToroidalVMMatrix::new([0.0, 0.0], [0.0, 0.0], Matrix2::zeros()).unwrap();
        let same = p.multiply(&flat).unwrap();
        assert!((same.a() - p.a()).amax() < 1e-12);
        assert!((same.kappa()[0] - p.kappa()[0]).abs() < 1e-12);
    }
}
