//! Truncated Fourier series densities in identity and square-root form.
//!
//! Coefficients are stored for `k = −n..=n` in a vector of length `2n+1`,
//! index `j` holding `c_{j−n}`. In identity form the density is
//! `Re Σ c_k e^{ikx}`; in square-root form it is `|Σ c_k e^{ikx}|²`.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::circular::CircularDensity;
use crate::error::{Error, Result};
use crate::numerics::{Complex64, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transformation {
    Identity,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FourierParams")]
pub struct FourierDensity {
    transformation: Transformation,
    coeffs: Vec<Complex64>,
}

#[derive(Deserialize)]
struct FourierParams {
    transformation: Transformation,
    coeffs: Vec<Complex64>,
}

impl TryFrom<FourierParams> for FourierDensity {
    type Error = Error;
    fn try_from(p: FourierParams) -> Result<Self> {
        FourierDensity::from_coefficients(p.coeffs, p.transformation)
    }
}

/// Forward DFT coefficients `c_k = (1/M) Σ_j g(x_j) e^{−ikx_j}` for
/// `|k| ≤ n`, with `x_j = 2πj/M`.
pub(crate) fn coefficients_from_samples(values: &[f64], n: usize) -> Vec<Complex64> {
    let m = values.len();
    debug_assert!(m > 2 * n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    (0..=2 * n)
        .map(|j| {
            let k = j as i64 - n as i64;
            buf[k.rem_euclid(m as i64) as usize] * scale
        })
        .collect()
}

/// Linear convolution of two coefficient sequences.
fn convolve_sequences(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Keeps the central `len` entries of an odd-length sequence.
fn central(c: &[Complex64], len: usize) -> Vec<Complex64> {
    if c.len() <= len {
        let pad = (len - c.len()) / 2;
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        out[pad..pad + c.len()].copy_from_slice(c);
        return out;
    }
    let off = (c.len() - len) / 2;
    c[off..off + len].to_vec()
}

/// Projects onto exact Hermitian symmetry `c_{−k} = conj(c_k)`.
fn hermitize(c: &mut [Complex64]) {
    let len = c.len();
    for j in 0..len / 2 + 1 {
        let avg = 0.5 * (c[j] + c[len - 1 - j].conj());
        c[j] = avg;
        c[len - 1 - j] = avg.conj();
    }
}

impl FourierDensity {
    /// Uses the given coefficients after restoring Hermitian symmetry and
    /// normalization.
    pub fn from_coefficients(coeffs: Vec<Complex64>, transformation: Transformation) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::param("coeffs", "length must be odd"));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::param("coeffs", "non-finite coefficient"));
        }
        let len = coeffs.len();
        for j in 0..len / 2 {
            let d = (coeffs[j] - coeffs[len - 1 - j].conj()).norm();
            if d > 1e-9 * (1.0 + coeffs[j].norm()) {
                return Err(Error::param("coeffs", "not Hermitian symmetric"));
            }
        }
        let mut fd = Self {
            transformation,
            coeffs,
        };
        hermitize(&mut fd.coeffs);
        fd.normalize()?;
        Ok(fd)
    }

    /// Fourier approximation with `n_coeffs` coefficients (odd, at least 3)
    /// of the density or of its square root.
    pub fn from_distribution(
        dist: &dyn CircularDensity,
        n_coeffs: usize,
        transformation: Transformation,
    ) -> Result<Self> {
        if n_coeffs < 3 || n_coeffs % 2 == 0 {
            return Err(Error::param("n_coeffs", format!("must be odd and >= 3, got {n_coeffs}")));
        }
        Self::from_function(|x| dist.pdf(x), n_coeffs, transformation)
    }

    /// Like [`from_distribution`](Self::from_distribution) for an arbitrary
    /// nonnegative function, normalized afterwards.
    pub fn from_function(
        f: impl Fn(f64) -> f64,
        n_coeffs: usize,
        transformation: Transformation,
    ) -> Result<Self> {
        let n = n_coeffs / 2;
        let m = 4 * n_coeffs;
        let values: Vec<f64> = (0..m)
            .map(|j| {
                let v = f(TWO_PI * j as f64 / m as f64);
                match transformation {
                    Transformation::Identity => v,
                    Transformation::Sqrt => v.max(0.0).sqrt(),
                }
            })
            .collect();
        let mut fd = Self {
            transformation,
            coeffs: coefficients_from_samples(&values, n),
        };
        hermitize(&mut fd.coeffs);
        fd.normalize()?;
        Ok(fd)
    }

    pub fn uniform(n_coeffs: usize, transformation: Transformation) -> Result<Self> {
        Self::from_function(|_| 1.0, n_coeffs, transformation)
    }

    fn normalize(&mut self) -> Result<()> {
        let mass = match self.transformation {
            Transformation::Identity => TWO_PI * self.coeffs[self.n()].re,
            Transformation::Sqrt => TWO_PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>(),
        };
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Degenerate(format!("Fourier series has mass {mass}")));
        }
        // already normalized series stay bit-identical
        if (mass - 1.0).abs() <= 1e-12 {
            return Ok(());
        }
        let s = match self.transformation {
            Transformation::Identity => 1.0 / mass,
            Transformation::Sqrt => 1.0 / mass.sqrt(),
        };
        for c in &mut self.coeffs {
            *c *= s;
        }
        Ok(())
    }

    pub fn transformation(&self) -> Transformation {
        self.transformation
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Highest frequency `n` stored.
    pub fn n(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// Coefficient `c_k`, zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.n() as i64;
        if k.abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    fn series(&self, x: f64) -> Complex64 {
        let n = self.n() as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::from_polar(1.0, (j as i64 - n) as f64 * x))
            .sum()
    }

    /// Identity-form coefficients of the density itself. For square-root
    /// form this is the autocorrelation, of length `4n+1`.
    pub fn density_coefficients(&self) -> Vec<Complex64> {
        match self.transformation {
            Transformation::Identity => self.coeffs.clone(),
            Transformation::Sqrt => convolve_sequences(&self.coeffs, &self.coeffs),
        }
    }

    /// Equivalent identity-form density with the full (untruncated)
    /// coefficient sequence.
    pub fn to_identity(&self) -> FourierDensity {
        let mut coeffs = self.density_coefficients();
        hermitize(&mut coeffs);
        FourierDensity {
            transformation: Transformation::Identity,
            coeffs,
        }
    }

    /// Square-root form by evaluating the density on a dense grid.
    pub fn to_sqrt(&self, n_coeffs: usize) -> Result<FourierDensity> {
        Self::from_function(|x| self.pdf_raw(x), n_coeffs, Transformation::Sqrt)
    }

    fn pdf_raw(&self, x: f64) -> f64 {
        let s = self.series(x);
        match self.transformation {
            Transformation::Identity => s.re,
            Transformation::Sqrt => s.norm_sqr(),
        }
    }

    fn check_tags(&self, other: &FourierDensity) -> Result<()> {
        if self.transformation != other.transformation {
            return Err(Error::param("transformation", "operands use different transformations"));
        }
        Ok(())
    }

    /// Renormalized pointwise product, truncated to this density's length.
    pub fn multiply(&self, other: &FourierDensity) -> Result<FourierDensity> {
        self.check_tags(other)?;
        let full = convolve_sequences(&self.coeffs, &other.coeffs);
        let mut coeffs = central(&full, self.coeffs.len());
        hermitize(&mut coeffs);
        let mut fd = FourierDensity {
            transformation: self.transformation,
            coeffs,
        };
        fd.normalize()?;
        Ok(fd)
    }

    /// Density of the sum of two independent angles.
    pub fn convolve(&self, other: &FourierDensity) -> Result<FourierDensity> {
        self.check_tags(other)?;
        let len = self.coeffs.len();
        match self.transformation {
            Transformation::Identity => {
                let coeffs: Vec<Complex64> = (0..len)
                    .map(|j| {
                        let k = j as i64 - self.n() as i64;
                        TWO_PI * self.coeffs[j] * other.coeff(k)
                    })
                    .collect();
                FourierDensity::from_coefficients(coeffs, Transformation::Identity)
            }
            Transformation::Sqrt => {
                let a = self.to_identity();
                let b = other.to_identity();
                let conv = a.convolve(&central_identity(&b, a.coeffs.len()))?;
                conv.to_sqrt(len)
            }
        }
    }

    /// Density of `x + delta`.
    pub fn shift(&self, delta: f64) -> FourierDensity {
        let n = self.n() as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::from_polar(1.0, -((j as i64 - n) as f64) * delta))
            .collect();
        FourierDensity {
            transformation: self.transformation,
            coeffs,
        }
    }

    /// Same density with the series truncated or zero-padded to `n_coeffs`.
    pub fn truncate(&self, n_coeffs: usize) -> Result<FourierDensity> {
        if n_coeffs % 2 == 0 {
            return Err(Error::param("n_coeffs", "must be odd"));
        }
        let mut fd = FourierDensity {
            transformation: self.transformation,
            coeffs: central(&self.coeffs, n_coeffs),
        };
        fd.normalize()?;
        Ok(fd)
    }
}

fn central_identity(fd: &FourierDensity, len: usize) -> FourierDensity {
    FourierDensity {
        transformation: fd.transformation,
        coeffs: central(&fd.coeffs, len),
    }
}

impl CircularDensity for FourierDensity {
    /// Identity-form values are clamped at zero here and nowhere else.
    fn pdf(&self, x: f64) -> f64 {
        self.pdf_raw(x).max(0.0)
    }

    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        let k = k as i64;
        match self.transformation {
            Transformation::Identity => TWO_PI * self.coeff(k).conj(),
            Transformation::Sqrt => {
                let n = self.n() as i64;
                // coefficient −k of |g|² is Σ_j c_j conj(c_{j+k})
                let s: Complex64 = (-n..=n).map(|j| self.coeff(j) * self.coeff(j + k).conj()).sum();
                TWO_PI * s
            }
        }
    }

    fn integral(&self) -> Result<f64> {
        Ok(self.trigonometric_moment(0).re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular::{CircularUniform, VonMises, WrappedNormal};
    use proptest::prelude::*;

    fn max_err(a: &dyn CircularDensity, b: &dyn CircularDensity) -> f64 {
        (0..1000)
            .map(|i| {
                let x = TWO_PI * i as f64 / 1000.0;
                (a.pdf(x) - b.pdf(x)).abs()
            })
            .fold(0.0, f64::max)
    }

    fn tv(a: &dyn CircularDensity, b: &dyn CircularDensity) -> f64 {
        let n = 4000;
        let h = TWO_PI / n as f64;
        0.5 * (0..n).map(|i| (a.pdf(i as f64 * h) - b.pdf(i as f64 * h)).abs() * h).sum::<f64>()
    }

    #[test]
    fn uniform_coefficients() {
        for t in [Transformation::Identity, Transformation::Sqrt] {
            let fd = FourierDensity::from_distribution(&CircularUniform::new(), 11, t).unwrap();
            assert!((fd.pdf(1.3) - 1.0 / TWO_PI).abs() < 1e-14);
            for k in 1..=5 {
                assert!(fd.coeff(k).norm() < 1e-15);
            }
        }
        let id = FourierDensity::from_distribution(&CircularUniform::new(), 11, Transformation::Identity).unwrap();
        assert!((id.coeff(0).re - 1.0 / TWO_PI).abs() < 1e-15);
    }

    #[test]
    fn sqrt_reconstruction_accuracy() {
        let vm = VonMises::new(6.0, 0.5).unwrap();
        let fd = FourierDensity::from_distribution(&vm, 31, Transformation::Sqrt).unwrap();
        assert!(max_err(&fd, &vm) <= 1e-6);
        let wn = WrappedNormal::new(2.0, 1.3).unwrap();
        let fd = FourierDensity::from_distribution(&wn, 31, Transformation::Sqrt).unwrap();
        assert!((fd.pdf(2.0) - wn.pdf(2.0)).abs() <= 1e-6);
    }

    #[test]
    fn identity_coefficients_are_conjugated_moments() {
        let wn = WrappedNormal::new(2.0, 1.3).unwrap();
        let fd = FourierDensity::from_distribution(&wn, 21, Transformation::Identity).unwrap();
        for k in 1..=10 {
            let expect = wn.trigonometric_moment(k).conj() / TWO_PI;
            assert!((fd.coeff(k as i64) - expect).norm() < 1e-12);
        }
        assert!((fd.trigonometric_moment(1) - wn.trigonometric_moment(1)).norm() < 1e-12);
    }

    #[test]
    fn sqrt_moments_match_numerical() {
        let vm = VonMises::new(2.0, 3.0).unwrap();
        let fd = FourierDensity::from_distribution(&vm, 41, Transformation::Sqrt).unwrap();
        for k in 0..=3 {
            let a = fd.trigonometric_moment(k);
            assert!((a - fd.trigonometric_moment_numerical(k)).norm() < 1e-9);
        }
    }

    #[test]
    fn multiplication_matches_exact_vm_product() {
        let a = VonMises::new(1.0, 2.0).unwrap();
        let b = VonMises::new(2.0, 1.5).unwrap();
        let exact = a.multiply(&b).unwrap();
        for t in [Transformation::Identity, Transformation::Sqrt] {
            let fa = FourierDensity::from_distribution(&a, 61, t).unwrap();
            let fb = FourierDensity::from_distribution(&b, 61, t).unwrap();
            let p = fa.multiply(&fb).unwrap();
            assert!(tv(&p, &exact) <= 1e-4, "{t:?}");
            assert!((p.integral().unwrap() - 1.0).abs() < 1e-9);
            let u = FourierDensity::uniform(61, t).unwrap();
            assert!(max_err(&fa.multiply(&u).unwrap(), &fa) < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_exact_wn_closure() {
        let a = WrappedNormal::new(1.0, 0.3).unwrap();
        let b = WrappedNormal::new(2.0, 0.4).unwrap();
        let exact = a.convolve(&b).unwrap();
        for t in [Transformation::Identity, Transformation::Sqrt] {
            let fa = FourierDensity::from_distribution(&a, 61, t).unwrap();
            let fb = FourierDensity::from_distribution(&b, 61, t).unwrap();
            let c = fa.convolve(&fb).unwrap();
            assert!(max_err(&c, &exact) <= 1e-6, "{t:?} {}", max_err(&c, &exact));
            assert!((c.integral().unwrap() - 1.0).abs() < 1e-9);
            let u = FourierDensity::uniform(61, t).unwrap();
            assert!(max_err(&fa.convolve(&u).unwrap(), &CircularUniform::new()) < 1e-12);
        }
    }

    #[test]
    fn mismatched_tags_rejected() {
        let wn = WrappedNormal::new(1.0, 0.5).unwrap();
        let a = FourierDensity::from_distribution(&wn, 11, Transformation::Identity).unwrap();
        let b = FourierDensity::from_distribution(&wn, 11, Transformation::Sqrt).unwrap();
        assert!(a.multiply(&b).is_err());
        assert!(FourierDensity::from_distribution(&wn, 10, Transformation::Sqrt).is_err());
    }

    #[test]
    fn json_shape() {
        let fd = FourierDensity::uniform(3, Transformation::Sqrt).unwrap();
        let v: serde_json::Value = serde_json::to_value(&fd).unwrap();
        assert_eq!(v["transformation"], "sqrt");
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 3);
        let back: FourierDensity = serde_json::from_value(v).unwrap();
        assert_eq!(back, fd);
    }

    proptest! {
        #[test]
        fn symmetric_product_stays_even(mu in 0.1f64..3.0, kappa in 0.1f64..4.0) {
            let f = VonMises::new(mu, kappa).unwrap();
            let g = VonMises::new(-mu, kappa).unwrap();
            let a = FourierDensity::from_distribution(&f, 31, Transformation::Sqrt).unwrap();
            let b = FourierDensity::from_distribution(&g, 31, Transformation::Sqrt).unwrap();
            let p = a.multiply(&b).unwrap();
            for x in [0.3, 1.1, 2.5] {
                prop_assert!((p.pdf(x) - p.pdf(-x)).abs() < 1e-12);
            }
            for c in p.coeffs() {
                prop_assert!(c.im.abs() < 1e-12);
            }
        }
    }
}
