//! Complex Bingham distribution.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{complex_scatter, exp_divided_difference, ComplexSphericalDensity};
use crate::error::{Error, Result};
use crate::numerics::{Complex64, TWO_PI};

/// Density `exp(zᴴBz) / c_B(B)` for Hermitian `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CbParams", into = "CbParams")]
pub struct ComplexBingham {
    b: DMatrix<Complex64>,
    /// Ascending.
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    log_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct CbParams {
    b: Vec<Vec<Complex64>>,
}

impl TryFrom<CbParams> for ComplexBingham {
    type Error = Error;
    fn try_from(p: CbParams) -> Result<Self> {
        let n = p.b.len();
        if p.b.iter().any(|r| r.len() != n) {
            return Err(Error::param("b", "must be square"));
        }
        ComplexBingham::new(DMatrix::from_fn(n, n, |i, j| p.b[i][j]))
    }
}

impl From<ComplexBingham> for CbParams {
    fn from(c: ComplexBingham) -> Self {
        let n = c.dim();
        CbParams {
            b: (0..n).map(|i| (0..n).map(|j| c.b[(i, j)]).collect()).collect(),
        }
    }
}

fn hermitian_eigen(b: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let e = SymmetricEigen::new(b.clone());
    let n = b.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].partial_cmp(&e.eigenvalues[j]).unwrap());
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

fn check_hermitian(b: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if b.nrows() != b.ncols() || b.nrows() == 0 {
        return Err(Error::param("b", "must be a nonempty square matrix"));
    }
    if b.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::param("b", "non-finite entry"));
    }
    let scale = 1.0 + b.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let dev = (b - b.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if dev > 1e-12 * scale {
        return Err(Error::param("b", format!("not Hermitian (deviation {dev:e})")));
    }
    Ok((b + b.adjoint()).unscale(2.0))
}

/// `ln c_B` from eigenvalues: `ln(2πⁿ) + ln exp[λ₁,…,λ_n]`, evaluated with
/// the largest eigenvalue factored out.
fn log_norm_from_eigenvalues(lam: &[f64]) -> f64 {
    let n = lam.len();
    let top = lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = lam.iter().map(|l| l - top).collect();
    (2.0 * PI.powi(n as i32)).ln() + top + exp_divided_difference(&shifted).ln()
}

/// `ln c_B(B)` with `c_B = 2πⁿ Σ_k a_k e^{λ_k}`, `a_k⁻¹ = Π_{l≠k}(λ_k − λ_l)`.
/// Clustered or repeated eigenvalues are handled by the confluent limit.
pub fn cb_log_norm(b: &DMatrix<Complex64>) -> Result<f64> {
    let h = check_hermitian(b)?;
    Ok(log_norm_from_eigenvalues(&hermitian_eigen(&h).0))
}

/// Real `2n×2n` parameter matrix acting on the interleaved embedding
/// `(Re z₁, Im z₁, Re z₂, …)`: entry `B_kl` becomes `[[Re, −Im], [Im, Re]]`.
pub fn cb_to_real(b: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = b.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let e = b[(r / 2, c / 2)];
        match (r % 2, c % 2) {
            (0, 0) | (1, 1) => e.re,
            (0, 1) => -e.im,
            _ => e.im,
        }
    })
}

/// `E[|v_kᴴz|²] = ∂ ln c_B / ∂λ_k = exp[λ, λ_k] / exp[λ]`.
fn eigen_moments(lam: &[f64]) -> Vec<f64> {
    let top = lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: Vec<f64> = lam.iter().map(|l| l - top).collect();
    let f = exp_divided_difference(&s);
    (0..s.len())
        .map(|k| {
            let mut nodes = s.clone();
            nodes.push(s[k]);
            exp_divided_difference(&nodes) / f
        })
        .collect()
}

impl ComplexBingham {
    pub fn new(b: DMatrix<Complex64>) -> Result<Self> {
        let b = check_hermitian(&b)?;
        let (eigenvalues, eigenvectors) = hermitian_eigen(&b);
        let log_norm = log_norm_from_eigenvalues(&eigenvalues);
        if !log_norm.is_finite() {
            return Err(Error::Degenerate("normalization constant is not finite".into()));
        }
        Ok(Self {
            b,
            eigenvalues,
            eigenvectors,
            log_norm,
        })
    }

    /// From eigenvectors (columns, unitary) and eigenvalues.
    pub fn from_eigen(v: &DMatrix<Complex64>, lam: &[f64]) -> Result<Self> {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(lam.len(), lam.iter().map(|&l| Complex64::new(l, 0.0))));
        Self::new(v * d * v.adjoint())
    }

    pub fn b(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Eigenvector of the largest eigenvalue (defined up to phase).
    pub fn mode(&self) -> DVector<Complex64> {
        self.eigenvectors.column(self.dim() - 1).into_owned()
    }

    pub fn to_real(&self) -> DMatrix<f64> {
        cb_to_real(&self.b)
    }

    /// `E[z zᴴ]`.
    pub fn scatter(&self) -> DMatrix<Complex64> {
        let e = eigen_moments(&self.eigenvalues);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(e.len(), e.iter().map(|&v| Complex64::new(v, 0.0))));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    pub fn fit(samples: &[Vec<Complex64>], weights: &[f64]) -> Result<Self> {
        Self::fit_scatter(&complex_scatter(samples, weights)?)
    }

    /// Maximum-likelihood fit: eigenvectors of the scatter matrix, and
    /// eigenvalues (largest fixed at zero) solving `∂ ln c_B/∂λ_k = s_k`.
    pub fn fit_scatter(s: &DMatrix<Complex64>) -> Result<Self> {
        let s = check_hermitian(s)?;
        let tr = s.trace().re;
        if !(tr > 0.0) {
            return Err(Error::param("scatter", "must have positive trace"));
        }
        let (sv, v) = hermitian_eigen(&s.unscale(tr));
        if sv[0] <= 1e-12 {
            return Err(Error::Degenerate("scatter matrix is singular".into()));
        }
        let lam = solve_eigenvalues(&sv)?;
        Self::from_eigen(&v, &lam)
    }
}

fn solve_eigenvalues(s: &[f64]) -> Result<Vec<f64>> {
    let n = s.len();
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let free = n - 1;
    let objective = |lam: &[f64]| {
        let f = exp_divided_difference(lam);
        f.ln() - lam.iter().zip(s).map(|(a, b)| a * b).sum::<f64>()
    };
    let mut lam: Vec<f64> = (0..n).map(|k| (-1.0 / s[k] + 1.0 / s[n - 1]).min(0.0)).collect();
    lam[n - 1] = 0.0;
    let mut fval = objective(&lam);
    const MAX_ITER: usize = 200;
    for _ in 0..MAX_ITER {
        let f = exp_divided_difference(&lam);
        let e = eigen_moments(&lam);
        let g = DVector::from_fn(free, |k, _| e[k] - s[k]);
        if g.amax() < 1e-12 {
            return Ok(lam);
        }
        let mut h = DMatrix::zeros(free, free);
        for j in 0..free {
            for k in j..free {
                let mut nodes = lam.clone();
                nodes.push(lam[j]);
                nodes.push(lam[k]);
                let mult = if j == k { 2.0 } else { 1.0 };
                let v = mult * exp_divided_difference(&nodes) / f - e[j] * e[k];
                h[(j, k)] = v;
                h[(k, j)] = v;
            }
        }
        let step = h.cholesky().map(|c| c.solve(&g)).unwrap_or_else(|| g.clone());
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = (0..n)
                .map(|k| if k < free { (lam[k] - t * step[k]).min(0.0) } else { 0.0 })
                .collect();
            let ft = objective(&trial);
            if ft.is_finite() && ft <= fval + 1e-15 * fval.abs().max(1.0) {
                lam = trial;
                fval = ft;
                break;
            }
            t *= 0.5;
            if t < 1e-14 {
                return Ok(lam);
            }
        }
    }
    Err(Error::IterationLimit { iterations: MAX_ITER })
}

impl ComplexSphericalDensity for ComplexBingham {
    fn dim(&self) -> usize {
        self.b.nrows()
    }

    fn pdf(&self, z: &[Complex64]) -> f64 {
        let v = DVector::from_column_slice(z);
        let q = (v.adjoint() * &self.b * &v)[(0, 0)].re;
        (q - self.log_norm).exp()
    }

    /// The squared moduli `s_k = |v_kᴴz|²` are drawn on the simplex by
    /// rejection from independent truncated exponentials; phases are
    /// uniform.
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<Complex64>> {
        let d = self.dim();
        let top = self.eigenvalues[d - 1];
        let rates: Vec<f64> = self.eigenvalues[..d - 1].iter().map(|l| top - l).collect();
        let truncated_exp = |r: f64, u: f64| {
            if r < 1e-12 {
                u
            } else {
                -(-u * (-(-r).exp_m1())).ln_1p() / r
            }
        };
        (0..n)
            .map(|_| {
                let s = loop {
                    let s: Vec<f64> = rates.iter().map(|&r| truncated_exp(r, rng.random())).collect();
                    let sum: f64 = s.iter().sum();
                    if sum <= 1.0 {
                        let mut s = s;
                        s.push(1.0 - sum);
                        break s;
                    }
                };
                let y = DVector::from_iterator(
                    d,
                    s.iter().map(|&sk| Complex64::from_polar(sk.max(0.0).sqrt(), TWO_PI * rng.random::<f64>())),
                );
                (&self.eigenvectors * y).iter().copied().collect()
            })
            .collect()
    }
}
