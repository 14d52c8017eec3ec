//! Grid and piecewise-constant filters on fixed discretizations of the circle.

use nalgebra::DMatrix;
use rustfft::FftPlanner;

use crate::circular::{CircularDensity, PiecewiseConstant, WrappedDiracMixture};
use crate::error::{Error, Result};
use crate::numerics::{integrate, Angle, Complex64, TWO_PI};

/// Circular convolution of two real sequences of equal length.
fn circular_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut fa: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    inv.process(&mut prod);
    prod.iter().map(|c| c.re / n as f64).collect()
}

fn check_likelihood(l: &[f64]) -> Result<()> {
    if let Some(bad) = l.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::param("likelihood", format!("must be finite and nonnegative, got {bad}")));
    }
    Ok(())
}

/// Density values at the fixed points `x_j = 2πj/L`.
#[derive(Debug, Clone)]
pub struct GridFilter {
    values: Vec<f64>,
}

impl GridFilter {
    pub fn uniform(l: usize) -> Result<Self> {
        Self::from_values(vec![1.0; l])
    }

    pub fn from_density(d: &dyn CircularDensity, l: usize) -> Result<Self> {
        Self::from_values((0..l).map(|j| d.pdf(TWO_PI * j as f64 / l as f64)).collect())
    }

    /// Unnormalized nonnegative values at the grid points.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 8 {
            return Err(Error::param("L", format!("grid needs at least 8 points, got {}", values.len())));
        }
        check_likelihood(&values)?;
        let mut g = Self { values };
        g.normalize()?;
        Ok(g)
    }

    fn normalize(&mut self) -> Result<()> {
        let mass = self.values.iter().sum::<f64>() * self.spacing();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Degenerate(format!("grid mass {mass}")));
        }
        for v in &mut self.values {
            *v /= mass;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn spacing(&self) -> f64 {
        TWO_PI / self.values.len() as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.len()).map(|j| j as f64 * h).collect()
    }

    /// Density values, normalized so that `Σ f_j · 2π/L = 1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn trigonometric_moment(&self, k: i32) -> Complex64 {
        let h = self.spacing();
        self.values
            .iter()
            .enumerate()
            .map(|(j, &v)| Complex64::from_polar(v * h, k as f64 * j as f64 * h))
            .sum()
    }

    pub fn circular_mean(&self) -> Result<Angle> {
        crate::circular::mean_from_moment(self.trigonometric_moment(1))
    }

    /// Weighted grid points, leaving out points without mass.
    pub fn to_dirac(&self) -> Result<WrappedDiracMixture> {
        let h = self.spacing();
        let (x, w): (Vec<f64>, Vec<f64>) = self
            .grid()
            .into_iter()
            .zip(&self.values)
            .filter(|(_, &v)| v > 0.0)
            .map(|(x, &v)| (x, v * h))
            .unzip();
        WrappedDiracMixture::new(x, w)
    }

    /// Identity system model with additive noise, evaluated on the grid and
    /// applied as a circular convolution.
    pub fn predict_identity(&mut self, noise: &dyn CircularDensity) -> Result<()> {
        let g: Vec<f64> = self.grid().iter().map(|&x| noise.pdf(x)).collect();
        let h = self.spacing();
        let conv = circular_convolution(&self.values, &g);
        self.values = conv.into_iter().map(|v| (v * h).max(0.0)).collect();
        self.normalize()
    }

    /// Chapman–Kolmogorov with a transition density `f(x_next, x_prev)`.
    pub fn predict_transition(&mut self, f: &dyn Fn(f64, f64) -> f64) -> Result<()> {
        let x = self.grid();
        let h = self.spacing();
        let next: Vec<f64> = x
            .iter()
            .map(|&xi| x.iter().zip(&self.values).map(|(&xj, &v)| f(xi, xj) * v).sum::<f64>() * h)
            .collect();
        check_likelihood(&next)?;
        self.values = next;
        self.normalize()
    }

    pub fn update(&mut self, likelihood: &dyn Fn(f64) -> f64) -> Result<()> {
        let l: Vec<f64> = self.grid().iter().map(|&x| likelihood(x)).collect();
        check_likelihood(&l)?;
        if super::is_flat(&l) {
            return Ok(());
        }
        let old = std::mem::take(&mut self.values);
        self.values = old.iter().zip(&l).map(|(v, l)| v * l).collect();
        if let Err(e) = self.normalize() {
            self.values = old;
            return Err(e);
        }
        Ok(())
    }
}

fn check_column_stochastic(name: &'static str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::param(name, "entries must be finite and nonnegative"));
    }
    for (j, col) in m.column_iter().enumerate() {
        let s: f64 = col.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::param(name, format!("column {j} sums to {s}")));
        }
    }
    Ok(())
}

/// Interval masses of a piecewise-constant density.
#[derive(Debug, Clone)]
pub struct PwcFilter {
    estimate: PiecewiseConstant,
}

impl PwcFilter {
    pub fn uniform(l: usize) -> Result<Self> {
        Ok(Self {
            estimate: PiecewiseConstant::new(vec![1.0; l])?,
        })
    }

    pub fn new(initial: PiecewiseConstant) -> Self {
        Self { estimate: initial }
    }

    pub fn estimate(&self) -> &PiecewiseConstant {
        &self.estimate
    }

    /// `w ← T·w` with `T[i, j]` the probability of moving from interval `j`
    /// to interval `i`.
    pub fn predict(&mut self, t: &DMatrix<f64>) -> Result<()> {
        let l = self.estimate.len();
        if t.nrows() != l || t.ncols() != l {
            return Err(Error::DimensionMismatch {
                expected: l,
                found: if t.nrows() != l { t.nrows() } else { t.ncols() },
            });
        }
        check_column_stochastic("transition", t)?;
        let w = t * nalgebra::DVector::from_column_slice(self.estimate.weights());
        self.estimate = PiecewiseConstant::new(w.iter().copied().collect())?;
        Ok(())
    }

    /// Likelihood evaluated at the interval centers.
    pub fn update(&mut self, likelihood: &dyn Fn(f64) -> f64) -> Result<()> {
        let l: Vec<f64> = self.estimate.centers().iter().map(|&x| likelihood(x)).collect();
        self.reweight(&l)
    }

    /// Discrete measurement `z` with `m[z, j] = P(z | interval j)`.
    pub fn update_measurement(&mut self, m: &DMatrix<f64>, z: usize) -> Result<()> {
        if m.ncols() != self.estimate.len() {
            return Err(Error::DimensionMismatch {
                expected: self.estimate.len(),
                found: m.ncols(),
            });
        }
        check_column_stochastic("measurement", m)?;
        if z >= m.nrows() {
            return Err(Error::param("z", format!("measurement index {z} out of range")));
        }
        let row: Vec<f64> = m.row(z).iter().copied().collect();
        self.reweight(&row)
    }

    fn reweight(&mut self, l: &[f64]) -> Result<()> {
        check_likelihood(l)?;
        if super::is_flat(l) {
            return Ok(());
        }
        let w: Vec<f64> = self.estimate.weights().iter().zip(l).map(|(w, l)| w * l).collect();
        if !(w.iter().sum::<f64>() > 0.0) {
            return Err(Error::Degenerate("posterior has no mass".into()));
        }
        self.estimate = PiecewiseConstant::new(w)?;
        Ok(())
    }
}

/// Column-stochastic transition matrix for an identity model with additive
/// noise: entry `(i, j)` is the noise mass carrying the center of interval
/// `j` into interval `i`.
pub fn pwc_transition_from_noise(noise: &dyn CircularDensity, l: usize) -> Result<DMatrix<f64>> {
    if l < 2 {
        return Err(Error::param("L", "need at least two intervals"));
    }
    let h = TWO_PI / l as f64;
    // offsets are measured from the center of the source interval
    let mass: Vec<f64> = (0..l)
        .map(|k| integrate(|x| noise.pdf(x), (k as f64 - 0.5) * h, (k as f64 + 0.5) * h, 1e-12))
        .collect::<Result<_>>()?;
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("noise has no mass".into()));
    }
    Ok(DMatrix::from_fn(l, l, |i, j| mass[(i + l - j) % l] / total))
}
