//! Multivariate Fourier densities on the hypertorus.
//!
//! The coefficient tensor has shape `(2n₁+1)×…×(2n_d+1)` and is stored
//! row-major (last axis fastest); entry `(j₁,…,j_d)` holds `c_{j−n}`.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{check_point, HypertoroidalDensity};
use crate::circular::CircularDistribution;
use crate::error::{Error, Result};
use crate::fourier::{FourierDensity, Transformation};
use crate::numerics::{Complex64, TWO_PI};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HfParams")]
pub struct HypertoroidalFourier {
    transformation: Transformation,
    shape: Vec<usize>,
    coeffs: Vec<Complex64>,
}

#[derive(Deserialize)]
struct HfParams {
    transformation: Transformation,
    shape: Vec<usize>,
    coeffs: Vec<Complex64>,
}

impl TryFrom<HfParams> for HypertoroidalFourier {
    type Error = Error;
    fn try_from(p: HfParams) -> Result<Self> {
        HypertoroidalFourier::from_coefficients(p.shape, p.coeffs, p.transformation)
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// In-place multidimensional DFT (unnormalized), one axis at a time.
fn fft_nd(buf: &mut [Complex64], dims: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    let total: usize = dims.iter().product();
    let mut stride = total;
    for &len in dims {
        stride /= len;
        let plan = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let mut line = vec![zero(); len];
        let block = len * stride;
        for start in 0..total / len {
            let base = (start / stride) * block + start % stride;
            for (i, v) in line.iter_mut().enumerate() {
                *v = buf[base + i * stride];
            }
            plan.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                buf[base + i * stride] = *v;
            }
        }
    }
}

fn multi_index(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        out[i] = flat % dims[i];
        flat /= dims[i];
    }
}

fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Central sub-tensor of shape `to` (zero-padded where `to` exceeds `from`).
fn central(c: &[Complex64], from: &[usize], to: &[usize]) -> Vec<Complex64> {
    let total: usize = to.iter().product();
    let mut out = vec![zero(); total];
    let mut idx = vec![0; to.len()];
    let mut src = vec![0; to.len()];
    'outer: for (f, o) in out.iter_mut().enumerate() {
        multi_index(f, to, &mut idx);
        for a in 0..to.len() {
            let k = idx[a] as i64 - (to[a] / 2) as i64;
            let s = k + (from[a] / 2) as i64;
            if s < 0 || s >= from[a] as i64 {
                continue 'outer;
            }
            src[a] = s as usize;
        }
        *o = c[flat_index(&src, from)];
    }
    out
}

/// Linear convolution of two centered coefficient tensors, via FFT.
fn convolve_tensors(a: &[Complex64], da: &[usize], b: &[Complex64], db: &[usize]) -> (Vec<Complex64>, Vec<usize>) {
    let full: Vec<usize> = da.iter().zip(db).map(|(x, y)| x + y - 1).collect();
    let total: usize = full.iter().product();
    let embed = |c: &[Complex64], dc: &[usize]| {
        let mut buf = vec![zero(); total];
        let mut idx = vec![0; dc.len()];
        for (f, v) in c.iter().enumerate() {
            multi_index(f, dc, &mut idx);
            buf[flat_index(&idx, &full)] = *v;
        }
        fft_nd(&mut buf, &full, false);
        buf
    };
    let fa = embed(a, da);
    let mut fb = embed(b, db);
    for (x, y) in fb.iter_mut().zip(fa.iter()) {
        *x *= y;
    }
    fft_nd(&mut fb, &full, true);
    let s = 1.0 / total as f64;
    fb.iter_mut().for_each(|v| *v *= s);
    (fb, full)
}

/// Projects onto `c_{−k} = conj(c_k)`. Mirroring every axis reverses the
/// row-major order.
fn hermitize(c: &mut [Complex64]) {
    let len = c.len();
    for j in 0..len / 2 + 1 {
        let avg = 0.5 * (c[j] + c[len - 1 - j].conj());
        c[j] = avg;
        c[len - 1 - j] = avg.conj();
    }
}

impl HypertoroidalFourier {
    pub fn from_coefficients(shape: Vec<usize>, coeffs: Vec<Complex64>, transformation: Transformation) -> Result<Self> {
        check_shape(&shape)?;
        let total: usize = shape.iter().product();
        if coeffs.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::param("coeffs", "non-finite coefficient"));
        }
        for j in 0..total / 2 {
            let d = (coeffs[j] - coeffs[total - 1 - j].conj()).norm();
            if d > 1e-9 * (1.0 + coeffs[j].norm()) {
                return Err(Error::param("coeffs", "not Hermitian symmetric"));
            }
        }
        let mut h = Self {
            transformation,
            shape,
            coeffs,
        };
        hermitize(&mut h.coeffs);
        h.normalize()?;
        Ok(h)
    }

    /// Approximation of `f` (or its square root) by sampling on a grid of
    /// four times the coefficient count per axis.
    pub fn from_function(f: impl Fn(&[f64]) -> f64, shape: Vec<usize>, transformation: Transformation) -> Result<Self> {
        check_shape(&shape)?;
        let grid: Vec<usize> = shape.iter().map(|s| 4 * s).collect();
        let total: usize = grid.iter().product();
        let d = shape.len();
        let mut idx = vec![0; d];
        let mut x = vec![0.0; d];
        let mut buf: Vec<Complex64> = (0..total)
            .map(|f_idx| {
                multi_index(f_idx, &grid, &mut idx);
                for a in 0..d {
                    x[a] = TWO_PI * idx[a] as f64 / grid[a] as f64;
                }
                let v = f(&x);
                let v = match transformation {
                    Transformation::Identity => v,
                    Transformation::Sqrt => v.max(0.0).sqrt(),
                };
                Complex64::new(v, 0.0)
            })
            .collect();
        fft_nd(&mut buf, &grid, false);
        let n_out: usize = shape.iter().product();
        let scale = 1.0 / total as f64;
        let mut coeffs = vec![zero(); n_out];
        let mut src = vec![0; d];
        for (f_idx, c) in coeffs.iter_mut().enumerate() {
            multi_index(f_idx, &shape, &mut idx);
            for a in 0..d {
                let k = idx[a] as i64 - (shape[a] / 2) as i64;
                src[a] = k.rem_euclid(grid[a] as i64) as usize;
            }
            *c = buf[flat_index(&src, &grid)] * scale;
        }
        let mut h = Self {
            transformation,
            shape,
            coeffs,
        };
        hermitize(&mut h.coeffs);
        h.normalize()?;
        Ok(h)
    }

    pub fn from_distribution(
        dist: &dyn HypertoroidalDensity,
        shape: Vec<usize>,
        transformation: Transformation,
    ) -> Result<Self> {
        if shape.len() != dist.dim() {
            return Err(Error::DimensionMismatch {
                expected: dist.dim(),
                found: shape.len(),
            });
        }
        Self::from_function(|x| dist.pdf(x), shape, transformation)
    }

    pub fn uniform(shape: Vec<usize>, transformation: Transformation) -> Result<Self> {
        Self::from_function(|_| 1.0, shape, transformation)
    }

    fn volume(&self) -> f64 {
        TWO_PI.powi(self.shape.len() as i32)
    }

    fn normalize(&mut self) -> Result<()> {
        let vol = self.volume();
        let mass = match self.transformation {
            Transformation::Identity => vol * self.coeffs[self.coeffs.len() / 2].re,
            Transformation::Sqrt => vol * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>(),
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
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        Ok(())
    }

    pub fn transformation(&self) -> Transformation {
        self.transformation
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient `c_k`, zero outside the stored range.
    pub fn coeff(&self, k: &[i32]) -> Complex64 {
        let mut idx = Vec::with_capacity(k.len());
        for (a, &kv) in k.iter().enumerate() {
            let n = (self.shape[a] / 2) as i64;
            if (kv as i64).abs() > n {
                return zero();
            }
            idx.push((kv as i64 + n) as usize);
        }
        self.coeffs[flat_index(&idx, &self.shape)]
    }

    fn series(&self, x: &[f64]) -> Complex64 {
        let d = self.shape.len();
        let tables: Vec<Vec<Complex64>> = (0..d)
            .map(|a| {
                let n = (self.shape[a] / 2) as i64;
                (0..self.shape[a])
                    .map(|j| Complex64::from_polar(1.0, (j as i64 - n) as f64 * x[a]))
                    .collect()
            })
            .collect();
        let mut idx = vec![0; d];
        self.coeffs
            .iter()
            .enumerate()
            .map(|(f, c)| {
                multi_index(f, &self.shape, &mut idx);
                idx.iter().enumerate().fold(*c, |acc, (a, &j)| acc * tables[a][j])
            })
            .sum()
    }

    fn pdf_raw(&self, x: &[f64]) -> f64 {
        let s = self.series(x);
        match self.transformation {
            Transformation::Identity => s.re,
            Transformation::Sqrt => s.norm_sqr(),
        }
    }

    /// Identity-form coefficients of the density and their shape.
    pub fn density_coefficients(&self) -> (Vec<Complex64>, Vec<usize>) {
        match self.transformation {
            Transformation::Identity => (self.coeffs.clone(), self.shape.clone()),
            Transformation::Sqrt => convolve_tensors(&self.coeffs, &self.shape, &self.coeffs, &self.shape),
        }
    }

    pub fn to_identity(&self) -> HypertoroidalFourier {
        let (mut coeffs, shape) = self.density_coefficients();
        hermitize(&mut coeffs);
        HypertoroidalFourier {
            transformation: Transformation::Identity,
            shape,
            coeffs,
        }
    }

    pub fn to_sqrt(&self, shape: Vec<usize>) -> Result<HypertoroidalFourier> {
        Self::from_function(|x| self.pdf_raw(x), shape, Transformation::Sqrt)
    }

    fn check_compatible(&self, other: &HypertoroidalFourier) -> Result<()> {
        if self.transformation != other.transformation {
            return Err(Error::param("transformation", "operands use different transformations"));
        }
        if self.shape.len() != other.shape.len() {
            return Err(Error::DimensionMismatch {
                expected: self.shape.len(),
                found: other.shape.len(),
            });
        }
        Ok(())
    }

    /// Renormalized pointwise product, truncated to this density's shape.
    pub fn multiply(&self, other: &HypertoroidalFourier) -> Result<HypertoroidalFourier> {
        self.check_compatible(other)?;
        let (full, dims) = convolve_tensors(&self.coeffs, &self.shape, &other.coeffs, &other.shape);
        let mut coeffs = central(&full, &dims, &self.shape);
        hermitize(&mut coeffs);
        let mut h = HypertoroidalFourier {
            transformation: self.transformation,
            shape: self.shape.clone(),
            coeffs,
        };
        h.normalize()?;
        Ok(h)
    }

    /// Density of the sum of two independent points.
    pub fn convolve(&self, other: &HypertoroidalFourier) -> Result<HypertoroidalFourier> {
        self.check_compatible(other)?;
        match self.transformation {
            Transformation::Identity => {
                let vol = self.volume();
                let d = self.shape.len();
                let mut idx = vec![0; d];
                let mut k = vec![0i32; d];
                let coeffs = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(f, c)| {
                        multi_index(f, &self.shape, &mut idx);
                        for a in 0..d {
                            k[a] = idx[a] as i32 - (self.shape[a] / 2) as i32;
                        }
                        vol * c * other.coeff(&k)
                    })
                    .collect();
                HypertoroidalFourier::from_coefficients(self.shape.clone(), coeffs, Transformation::Identity)
            }
            Transformation::Sqrt => {
                let a = self.to_identity();
                let b = other.to_identity();
                a.convolve(&b)?.to_sqrt(self.shape.clone())
            }
        }
    }

    /// Density of `x + delta`.
    pub fn shift(&self, delta: &[f64]) -> Result<HypertoroidalFourier> {
        check_point(self.shape.len(), delta)?;
        let d = self.shape.len();
        let mut idx = vec![0; d];
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(f, c)| {
                multi_index(f, &self.shape, &mut idx);
                let ph: f64 = (0..d)
                    .map(|a| (idx[a] as f64 - (self.shape[a] / 2) as f64) * delta[a])
                    .sum();
                c * Complex64::from_polar(1.0, -ph)
            })
            .collect();
        Ok(HypertoroidalFourier {
            transformation: self.transformation,
            shape: self.shape.clone(),
            coeffs,
        })
    }

    /// Identity-form Fourier marginal of axis `dim` (zero-based).
    pub fn marginalize_to_1d(&self, dim: usize) -> Result<CircularDistribution> {
        let d = self.shape.len();
        if dim >= d {
            return Err(Error::param("dimension", "axis out of range"));
        }
        let (c, shape) = self.density_coefficients();
        let n = shape[dim] / 2;
        let mut k = vec![0i32; d];
        let vol_rest = TWO_PI.powi(d as i32 - 1);
        let src = HypertoroidalFourier {
            transformation: Transformation::Identity,
            shape,
            coeffs: c,
        };
        let coeffs = (0..2 * n + 1)
            .map(|j| {
                k[dim] = j as i32 - n as i32;
                vol_rest * src.coeff(&k)
            })
            .collect();
        Ok(FourierDensity::from_coefficients(coeffs, Transformation::Identity)?.into())
    }
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(Error::param("shape", "needs at least one axis"));
    }
    if shape.iter().any(|&s| s % 2 == 0) {
        return Err(Error::param("shape", "every axis length must be odd"));
    }
    Ok(())
}

impl HypertoroidalDensity for HypertoroidalFourier {
    fn dim(&self) -> usize {
        self.shape.len()
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        self.pdf_raw(x).max(0.0)
    }

    fn trigonometric_moment(&self, k: &[i32]) -> Complex64 {
        let neg: Vec<i32> = k.iter().map(|v| -v).collect();
        let vol = self.volume();
        match self.transformation {
            Transformation::Identity => vol * self.coeff(&neg),
            Transformation::Sqrt => {
                let (c, shape) = self.density_coefficients();
                let full = HypertoroidalFourier {
                    transformation: Transformation::Identity,
                    shape,
                    coeffs: c,
                };
                vol * full.coeff(&neg)
            }
        }
    }

    fn integral(&self) -> Result<f64> {
        Ok(match self.transformation {
            Transformation::Identity => self.volume() * self.coeffs[self.coeffs.len() / 2].re,
            Transformation::Sqrt => self.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypertorus::HypertoroidalWN;
    use nalgebra::dmatrix;

    fn twn() -> HypertoroidalWN {
        HypertoroidalWN::new(vec![1.0, 3.0], dmatrix![1.0, -0.8; -0.8, 0.9]).unwrap()
    }

    #[test]
    fn nd_fft_matches_direct_dft() {
        let dims = [3, 4];
        let vals: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let mut buf = vals.clone();
        fft_nd(&mut buf, &dims, false);
        for a in 0..3 {
            for b in 0..4 {
                let mut s = zero();
                for x in 0..3 {
                    for y in 0..4 {
                        let ph = -TWO_PI * (a * x) as f64 / 3.0 - TWO_PI * (b * y) as f64 / 4.0;
                        s += vals[x * 4 + y] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((s - buf[a * 4 + b]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn approximates_twn_in_both_forms() {
        let t = twn();
        for tr in [Transformation::Identity, Transformation::Sqrt] {
            let h = HypertoroidalFourier::from_distribution(&t, vec![31, 31], tr).unwrap();
            assert!((h.integral().unwrap() - 1.0).abs() < 1e-12);
            for x in [[1.0, 3.0], [0.3, 5.0], [2.0, 2.0]] {
                assert!((h.pdf(&x) - t.pdf(&x)).abs() < 1e-6, "{tr:?}");
            }
            for k in [[1, 0], [1, 1], [1, -1], [0, 2]] {
                assert!((h.trigonometric_moment(&k) - t.trigonometric_moment(&k)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn marginal_matches_wn() {
        let t = twn();
        for tr in [Transformation::Identity, Transformation::Sqrt] {
            let h = HypertoroidalFourier::from_distribution(&t, vec![25, 25], tr).unwrap();
            let m = h.marginalize_to_1d(1).unwrap();
            let wn = t.marginalize_to_1d(1).unwrap();
            for x in [0.0, 1.5, 3.0, 5.0] {
                assert!((m.pdf(x).unwrap() - wn.pdf(x).unwrap()).abs() < 1e-7);
            }
            let direct = h.trigonometric_moment(&[0, 1]);
            assert!((m.trigonometric_moment(1) - direct).norm() < 1e-8);
        }
    }

    #[test]
    fn convolution_matches_hwn_closure() {
        let a = twn();
        let b = HypertoroidalWN::new(vec![0.5, 0.2], dmatrix![0.3, 0.1; 0.1, 0.2]).unwrap();
        let exact = a.convolve(&b).unwrap();
        for tr in [Transformation::Identity, Transformation::Sqrt] {
            let fa = HypertoroidalFourier::from_distribution(&a, vec![31, 31], tr).unwrap();
            let fb = HypertoroidalFourier::from_distribution(&b, vec![31, 31], tr).unwrap();
            let c = fa.convolve(&fb).unwrap();
            for x in [[1.5, 3.2], [0.0, 0.0], [4.0, 1.0]] {
                assert!((c.pdf(&x) - exact.pdf(&x)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn product_matches_grid_product() {
        let a = twn();
        let b = HypertoroidalWN::new(vec![1.5, 2.5], dmatrix![0.8, 0.2; 0.2, 0.7]).unwrap();
        let n = 128;
        let h = TWO_PI / n as f64;
        let mut z = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = [i as f64 * h, j as f64 * h];
                z += a.pdf(&x) * b.pdf(&x) * h * h;
            }
        }
        for tr in [Transformation::Identity, Transformation::Sqrt] {
            let fa = HypertoroidalFourier::from_distribution(&a, vec![41, 41], tr).unwrap();
            let fb = HypertoroidalFourier::from_distribution(&b, vec![41, 41], tr).unwrap();
            let p = fa.multiply(&fb).unwrap();
            for x in [[1.3, 2.8], [0.5, 4.0]] {
                assert!((p.pdf(&x) - a.pdf(&x) * b.pdf(&x) / z).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn three_dimensional_uniform() {
        let u = HypertoroidalFourier::uniform(vec![3, 5, 3], Transformation::Sqrt).unwrap();
        assert!((u.pdf(&[0.1, 2.0, 4.0]) - 1.0 / TWO_PI.powi(3)).abs() < 1e-14);
        assert!(u.trigonometric_moment(&[1, 0, 0]).norm() < 1e-14);
        let s = u.shift(&[0.3, 0.0, 1.0]).unwrap();
        assert!((s.pdf(&[1.0, 1.0, 1.0]) - u.pdf(&[1.0, 1.0, 1.0])).abs() < 1e-14);
    }
}
