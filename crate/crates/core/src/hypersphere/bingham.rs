//! Bingham distribution with `M Z Mᵀ` parameterization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{scatter_matrix, HypersphericalDensity};
use crate::error::{Error, Result};
use crate::numerics::integrate_sphere;

/// Metropolis–Hastings chain constants.
const BURN_IN: usize = 100;
const THINNING: usize = 5;

/// Density `exp(xᵀ M Z Mᵀ x) / N(Z)`. Always canonical: `Z` ascending,
/// `Z_d = 0`, columns of `M` reordered to match and signed so that their
/// largest-magnitude entry is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BinghamParams", into = "BinghamParams")]
pub struct BinghamDist {
    m: DMatrix<f64>,
    z: DVector<f64>,
    log_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct BinghamParams {
    m: Vec<Vec<f64>>,
    z: Vec<f64>,
}

impl TryFrom<BinghamParams> for BinghamDist {
    type Error = Error;
    fn try_from(p: BinghamParams) -> Result<Self> {
        let d = p.z.len();
        if p.m.len() != d || p.m.iter().any(|r| r.len() != d) {
            return Err(Error::param("m", "must be d×d matching z"));
        }
        BinghamDist::new(DMatrix::from_fn(d, d, |i, j| p.m[i][j]), &p.z)
    }
}

impl From<BinghamDist> for BinghamParams {
    fn from(b: BinghamDist) -> Self {
        let d = b.z.len();
        BinghamParams {
            m: (0..d).map(|i| (0..d).map(|j| b.m[(i, j)]).collect()).collect(),
            z: b.z.iter().copied().collect(),
        }
    }
}

/// Integral weight `exp(Σ Z_i y_i²)` in the eigenbasis.
fn weight(z: &[f64], y: &[f64]) -> f64 {
    z.iter().zip(y).map(|(zi, yi)| zi * yi * yi).sum::<f64>().exp()
}

/// Quadrature with an absolute tolerance scaled to the magnitude of the
/// result, found in a coarse first pass.
fn relative_sphere_integral(f: impl Fn(&[f64]) -> f64, d: usize, rel: f64) -> Result<f64> {
    let coarse = integrate_sphere(&f, d, 1e-6)?;
    integrate_sphere(&f, d, rel * coarse.abs().max(1e-280))
}

fn rel_tol(d: usize) -> f64 {
    if d == 4 {
        1e-8
    } else {
        1e-11
    }
}

/// Normalization constant `N(Z) = ∫ exp(Σ Z_i y_i²) dy` over `S^{d−1}`,
/// `d ∈ {2, 3, 4}`.
pub fn bingham_norm_const(z: &[f64]) -> Result<f64> {
    let d = z.len();
    if !(2..=4).contains(&d) {
        return Err(Error::Unsupported(format!("Bingham quadrature supports d in 2..=4, got {d}")));
    }
    relative_sphere_integral(|y| weight(z, y), d, rel_tol(d))
}

/// `E[y_i²]` under the canonical-axis density for every `i`.
fn axis_moments(z: &[f64], n: f64) -> Result<Vec<f64>> {
    let d = z.len();
    (0..d)
        .map(|i| Ok(relative_sphere_integral(|y| y[i] * y[i] * weight(z, y), d, rel_tol(d))? / n))
        .collect()
}

fn fourth_moments(z: &[f64], n: f64, free: usize) -> Result<DMatrix<f64>> {
    let d = z.len();
    let mut h = DMatrix::zeros(free, free);
    for i in 0..free {
        for j in i..free {
            let v = relative_sphere_integral(|y| y[i] * y[i] * y[j] * y[j] * weight(z, y), d, rel_tol(d))? / n;
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

impl BinghamDist {
    /// Builds the canonical form of `(M, Z)`. `M` must be orthogonal.
    pub fn new(m: DMatrix<f64>, z: &[f64]) -> Result<Self> {
        let d = z.len();
        if !(2..=4).contains(&d) {
            return Err(Error::Unsupported(format!("Bingham supports d in 2..=4, got {d}")));
        }
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
        if m.iter().chain(z.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("m", "non-finite entry"));
        }
        let ortho = (m.transpose() * &m - DMatrix::identity(d, d)).amax();
        if ortho > 1e-10 {
            return Err(Error::param("m", format!("not orthogonal (deviation {ortho:e})")));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| z[a].partial_cmp(&z[b]).unwrap());
        let top = z[order[d - 1]];
        let zc = DVector::from_iterator(d, order.iter().map(|&i| z[i] - top));
        let mut mc = DMatrix::zeros(d, d);
        for (k, &i) in order.iter().enumerate() {
            let mut col = m.column(i).into_owned();
            let imax = col.iamax();
            if col[imax] < 0.0 {
                col = -col;
            }
            mc.set_column(k, &col);
        }
        let log_norm = bingham_norm_const(zc.as_slice())?.ln();
        Ok(Self {
            m: mc,
            z: zc,
            log_norm,
        })
    }

    /// From a symmetric parameter matrix `A` with density `∝ exp(xᵀAx)`.
    pub fn from_parameter_matrix(a: &DMatrix<f64>) -> Result<Self> {
        if (a - a.transpose()).amax() > 1e-12 * (1.0 + a.amax()) {
            return Err(Error::param("a", "must be symmetric"));
        }
        let e = SymmetricEigen::new(0.5 * (a + a.transpose()));
        Self::new(e.eigenvectors, e.eigenvalues.as_slice())
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn parameter_matrix(&self) -> DMatrix<f64> {
        &self.m * DMatrix::from_diagonal(&self.z) * self.m.transpose()
    }

    /// Mode direction, the column of `M` belonging to `Z_d = 0`. The
    /// antipode is an equally valid mode.
    pub fn mode(&self) -> DVector<f64> {
        self.m.column(self.dim() - 1).into_owned()
    }

    /// Exact product: parameter matrices add.
    pub fn multiply(&self, other: &BinghamDist) -> Result<BinghamDist> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::from_parameter_matrix(&(self.parameter_matrix() + other.parameter_matrix()))
    }

    /// `E[x xᵀ] = M diag(∂ ln N/∂Z_i) Mᵀ`.
    pub fn scatter(&self) -> Result<DMatrix<f64>> {
        let e = axis_moments(self.z.as_slice(), self.log_norm.exp())?;
        Ok(&self.m * DMatrix::from_diagonal(&DVector::from_vec(e)) * self.m.transpose())
    }

    pub fn fit(samples: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        Self::fit_scatter(&scatter_matrix(samples, weights)?)
    }

    /// Maximum-likelihood fit to a scatter matrix: `M` holds its
    /// eigenvectors and `Z` solves `E[y_i²] = λ_i`, by Newton's method on
    /// the convex objective `ln N(Z) − Σ Z_i λ_i` with backtracking.
    pub fn fit_scatter(s: &DMatrix<f64>) -> Result<Self> {
        let d = s.nrows();
        if !(2..=4).contains(&d) || s.ncols() != d {
            return Err(Error::Unsupported(format!("Bingham fit supports d in 2..=4, got {d}")));
        }
        let tr = s.trace();
        if !(tr > 0.0) || (s - s.transpose()).amax() > 1e-10 * tr {
            return Err(Error::param("scatter", "must be symmetric with positive trace"));
        }
        let e = SymmetricEigen::new(0.5 * (s + s.transpose()) / tr);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
        let lam: Vec<f64> = order.iter().map(|&i| e.eigenvalues[i]).collect();
        let m = DMatrix::from_fn(d, d, |r, c| e.eigenvectors[(r, order[c])]);
        if lam[0] <= 1e-12 {
            return Err(Error::Degenerate("scatter matrix is singular".into()));
        }
        if lam.windows(2).any(|w| w[1] - w[0] < 1e-9) {
            return Err(Error::Degenerate("repeated scatter eigenvalues make the fit ambiguous".into()));
        }
        let z = solve_z(&lam)?;
        Self::new(m, &z)
    }
}

fn solve_z(lam: &[f64]) -> Result<Vec<f64>> {
    let d = lam.len();
    let free = d - 1;
    let objective = |z: &[f64]| -> Result<f64> {
        let n = bingham_norm_const(z)?;
        Ok(n.ln() - z.iter().zip(lam).map(|(a, b)| a * b).sum::<f64>())
    };
    let mut z: Vec<f64> = (0..d)
        .map(|i| (-0.5 / lam[i] + 0.5 / lam[d - 1]).min(0.0))
        .collect();
    z[d - 1] = 0.0;
    let mut f = objective(&z)?;
    for _ in 0..100 {
        let n = bingham_norm_const(&z)?;
        let e = axis_moments(&z, n)?;
        let g = DVector::from_fn(free, |i, _| e[i] - lam[i]);
        if g.amax() < 1e-10 {
            return Ok(z);
        }
        let mut h = fourth_moments(&z, n, free)?;
        for i in 0..free {
            for j in 0..free {
                h[(i, j)] -= e[i] * e[j];
            }
        }
        let step = h
            .clone()
            .cholesky()
            .map(|c| c.solve(&g))
            .unwrap_or_else(|| g.clone());
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = (0..d)
                .map(|i| if i < free { z[i] - t * step[i] } else { 0.0 })
                .collect();
            if let Ok(ft) = objective(&trial) {
                if ft <= f + 1e-14 * f.abs().max(1.0) {
                    z = trial;
                    f = ft;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::IterationLimit { iterations: 100 });
            }
        }
    }
    Err(Error::IterationLimit { iterations: 100 })
}

impl HypersphericalDensity for BinghamDist {
    fn dim(&self) -> usize {
        self.z.len()
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let y = self.m.transpose() * xv;
        let q: f64 = self.z.iter().zip(y.iter()).map(|(z, v)| z * v * v).sum();
        (q - self.log_norm).exp()
    }

    /// Independence Metropolis–Hastings with an angular central Gaussian
    /// proposal `∝ (xᵀΩx)^{−d/2}`, `Ω = I + 2A/b`, `A = −MZMᵀ` and `b`
    /// solving `Σ 1/(b + 2λ_i(A)) = 1`.
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let d = self.dim();
        let lam: Vec<f64> = self.z.iter().map(|z| -z).collect();
        let b = acg_b(&lam);
        let scale: Vec<f64> = lam.iter().map(|l| 1.0 / (1.0 + 2.0 * l / b).sqrt()).collect();
        let log_ratio = |y: &[f64]| {
            // log target − log proposal in the eigenbasis
            let q: f64 = y.iter().zip(&lam).map(|(v, l)| l * v * v).sum();
            let w: f64 = y.iter().zip(&lam).map(|(v, l)| (1.0 + 2.0 * l / b) * v * v).sum();
            -q + 0.5 * d as f64 * w.ln()
        };
        let propose = |rng: &mut dyn RngCore| -> Vec<f64> {
            let y: Vec<f64> = scale
                .iter()
                .map(|s| s * Distribution::<f64>::sample(&StandardNormal, rng))
                .collect();
            let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            y.into_iter().map(|v| v / nrm).collect()
        };
        let mut cur: Vec<f64> = (0..d).map(|i| if i == d - 1 { 1.0 } else { 0.0 }).collect();
        let mut cur_r = log_ratio(&cur);
        let mut out = Vec::with_capacity(n);
        let total = BURN_IN + n * THINNING;
        for step in 0..total {
            let prop = propose(rng);
            let r = log_ratio(&prop);
            let u: f64 = rng.random();
            if u.ln() < r - cur_r {
                cur = prop;
                cur_r = r;
            }
            if step >= BURN_IN && (step - BURN_IN) % THINNING == THINNING - 1 {
                let x = &self.m * DVector::from_column_slice(&cur);
                out.push(x.iter().copied().collect());
            }
        }
        out
    }
}

/// Root of `Σ 1/(b + 2λ_i) = 1` on `(0, d]`.
fn acg_b(lam: &[f64]) -> f64 {
    let g = |b: f64| lam.iter().map(|l| 1.0 / (b + 2.0 * l)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (1e-12, lam.len() as f64);
    if g(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{bessel_i, bessel_i_ratio, sphere_area};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rotation3(a: f64, b: f64) -> DMatrix<f64> {
        let rz = DMatrix::from_row_slice(3, 3, &[a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0]);
        let rx = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, b.cos(), -b.sin(), 0.0, b.sin(), b.cos()]);
        rz * rx
    }

    #[test]
    fn norm_const_reference_values() {
        for d in 2..=4 {
            let n = bingham_norm_const(&vec![0.0; d]).unwrap();
            assert!((n - sphere_area(d)).abs() < 1e-8);
        }
        let n = bingham_norm_const(&[-2.0, 0.0]).unwrap();
        assert!((n - 2.0 * PI * (-1.0f64).exp() * bessel_i(0.0, 1.0)).abs() < 1e-12);
        // concentrated case keeps relative accuracy
        let z = -400.0;
        let n = bingham_norm_const(&[z, 0.0]).unwrap();
        let expect = 2.0 * PI * (z / 2.0).exp() * bessel_i(0.0, -z / 2.0);
        assert!((n / expect - 1.0).abs() < 1e-9);
    }

    #[test]
    fn canonical_form_and_symmetry() {
        let m = rotation3(0.4, 1.1);
        let b = BinghamDist::new(m.clone(), &[1.0, -3.0, 0.0]).unwrap();
        assert_eq!(b.z().as_slice(), &[-4.0, -1.0, 0.0]);
        let again = BinghamDist::new(b.m().clone(), b.z().as_slice()).unwrap();
        assert_eq!(again, b);
        let mode = b.mode();
        let col = m.column(0);
        assert!((mode.dot(&col).abs() - 1.0).abs() < 1e-14);
        let x = DVector::from_vec(vec![0.48, 0.6, 0.64]);
        assert!((b.pdf(x.as_slice()) - b.pdf((-&x).as_slice())).abs() < 1e-15);
        assert!((b.integral().unwrap() - 1.0).abs() < 1e-8);
        assert!(BinghamDist::new(DMatrix::from_element(3, 3, 1.0), &[0.0; 3]).is_err());
        assert!(BinghamDist::new(DMatrix::identity(5, 5), &[0.0; 5]).is_err());
    }

    #[test]
    fn multiplication_adds_parameters() {
        let a = BinghamDist::new(rotation3(0.4, 1.1), &[-4.0, -1.0, 0.0]).unwrap();
        let c = BinghamDist::new(rotation3(2.0, 0.3), &[-2.0, -0.5, 0.0]).unwrap();
        let p = a.multiply(&c).unwrap();
        let z = integrate_sphere(|x| a.pdf(x) * c.pdf(x), 3, 1e-12).unwrap();
        for x in [[0.48, 0.6, 0.64], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]] {
            assert!((a.pdf(&x) * c.pdf(&x) / z - p.pdf(&x)).abs() < 1e-6);
        }
        let flat = BinghamDist::new(DMatrix::identity(3, 3), &[0.0; 3]).unwrap();
        let same = a.multiply(&flat).unwrap();
        assert!((same.parameter_matrix() - a.parameter_matrix()).amax() < 1e-12);
    }

    #[test]
    fn circle_moments_match_bessel_identity() {
        // d = 2: E[y₁²] = 1/2 − I₁(−z/2) / (2 I₀(−z/2))
        let b = BinghamDist::new(DMatrix::identity(2, 2), &[-3.0, 0.0]).unwrap();
        let s = b.scatter().unwrap();
        let expect = 0.5 - 0.5 * bessel_i_ratio(0.0, 1.5);
        assert!((s[(0, 0)] - expect).abs() < 1e-10);
    }

    #[test]
    fn fit_round_trip() {
        let b = BinghamDist::new(DMatrix::identity(2, 2), &[-6.0, 0.0]).unwrap();
        let exact = BinghamDist::fit_scatter(&b.scatter().unwrap()).unwrap();
        assert!((exact.z()[0] + 6.0).abs() < 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = b.sample(20_000, &mut rng);
        let f = BinghamDist::fit(&s, &vec![1.0; s.len()]).unwrap();
        assert!((f.z()[0] + 6.0).abs() < 0.6);
        let b3 = BinghamDist::new(rotation3(0.4, 1.1), &[-5.0, -2.0, 0.0]).unwrap();
        let f3 = BinghamDist::fit_scatter(&b3.scatter().unwrap()).unwrap();
        assert!((f3.z() - b3.z()).amax() < 1e-5);
        assert!(BinghamDist::fit_scatter(&(DMatrix::identity(3, 3) / 3.0)).is_err());
    }

    #[test]
    fn sampler_matches_scatter() {
        let b = BinghamDist::new(rotation3(0.4, 1.1), &[-5.0, -2.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = b.sample(40_000, &mut rng);
        let emp = scatter_matrix(&s, &vec![1.0; s.len()]).unwrap();
        assert!((emp - b.scatter().unwrap()).amax() < 0.01);
        let u = BinghamDist::new(DMatrix::identity(3, 3), &[0.0; 3]).unwrap();
        let su = u.sample(30_000, &mut rng);
        let emp = scatter_matrix(&su, &vec![1.0; su.len()]).unwrap();
        assert!((emp - DMatrix::identity(3, 3) / 3.0).amax() < 0.01);
        let mut r1 = ChaCha8Rng::seed_from_u64(8);
        let mut r2 = ChaCha8Rng::seed_from_u64(8);
        assert_eq!(b.sample(10, &mut r1), b.sample(10, &mut r2));
    }
}
