//! Modified Bingham distribution on `S¹ × R²`.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{weighted_moments, Se2Point};
use crate::circular::{CircularDensity, VonMises};
use crate::error::{Error, Result};
use crate::numerics::{bessel_ratio, inverse_bessel_ratio, log_bessel_i, TWO_PI};

/// Density `exp(xᵀCx) / N(C)` with `C = [[C₁, C₂ᵀ], [C₂, C₃]]`, `C₃`
/// negative definite. Equivalently
/// `exp(x_sᵀT₁x_s + (x_t − T₂x_s)ᵀC₃(x_t − T₂x_s)) / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Se2bParams", into = "Se2bParams")]
pub struct Se2Bingham {
    c: Matrix4<f64>,
    t1: Matrix2<f64>,
    t2: Matrix2<f64>,
    c3: Matrix2<f64>,
    log_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct Se2bParams {
    c: [[f64; 4]; 4],
}

impl TryFrom<Se2bParams> for Se2Bingham {
    type Error = Error;
    fn try_from(p: Se2bParams) -> Result<Self> {
        Se2Bingham::new(Matrix4::from_fn(|i, j| p.c[i][j]))
    }
}

impl From<Se2Bingham> for Se2bParams {
    fn from(b: Se2Bingham) -> Self {
        Se2bParams {
            c: std::array::from_fn(|i| std::array::from_fn(|j| b.c[(i, j)])),
        }
    }
}

/// Eigenvalues ascending with matching unit eigenvectors.
fn eigen2(m: &Matrix2<f64>) -> ([f64; 2], [Vector2<f64>; 2]) {
    let e = SymmetricEigen::new(*m);
    let (lo, hi) = if e.eigenvalues[0] <= e.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let v = |i: usize| e.eigenvectors.column(i).into_owned();
    ([e.eigenvalues[lo], e.eigenvalues[hi]], [v(lo), v(hi)])
}

impl Se2Bingham {
    pub fn new(c: Matrix4<f64>) -> Result<Self> {
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("c", "non-finite entry"));
        }
        let scale = c.amax().max(1.0);
        if (c - c.transpose()).amax() > 1e-12 * scale {
            return Err(Error::param("c", "must be symmetric (C₁, C₃ symmetric and off-diagonal blocks C₂, C₂ᵀ)"));
        }
        let c = (c + c.transpose()) * 0.5;
        let c1: Matrix2<f64> = c.fixed_view::<2, 2>(0, 0).into_owned();
        let c2: Matrix2<f64> = c.fixed_view::<2, 2>(2, 0).into_owned();
        let c3: Matrix2<f64> = c.fixed_view::<2, 2>(2, 2).into_owned();
        let (ev, _) = eigen2(&c3);
        if !(ev[1] < 0.0) {
            return Err(Error::param("c", "C₃ must be negative definite"));
        }
        let c3_inv = c3.try_inverse().ok_or_else(|| Error::param("c", "C₃ is singular"))?;
        let t1 = c1 - c2.transpose() * c3_inv * c2;
        let t1 = (t1 + t1.transpose()) * 0.5;
        let t2 = -c3_inv * c2;
        let (t, _) = eigen2(&t1);
        let log_norm = PI.ln() - 0.5 * (-c3).determinant().ln()
            + TWO_PI.ln()
            + 0.5 * (t[0] + t[1])
            + log_bessel_i(0.0, 0.5 * (t[1] - t[0]));
        Ok(Self { c, t1, t2, c3, log_norm })
    }

    pub fn from_blocks(c1: Matrix2<f64>, c2: Matrix2<f64>, c3: Matrix2<f64>) -> Result<Self> {
        if (c1 - c1.transpose()).amax() > 1e-12 * c1.amax().max(1.0) {
            return Err(Error::param("c1", "must be symmetric"));
        }
        if (c3 - c3.transpose()).amax() > 1e-12 * c3.amax().max(1.0) {
            return Err(Error::param("c3", "must be symmetric"));
        }
        let mut c = Matrix4::zeros();
        c.fixed_view_mut::<2, 2>(0, 0).copy_from(&c1);
        c.fixed_view_mut::<2, 2>(2, 0).copy_from(&c2);
        c.fixed_view_mut::<2, 2>(0, 2).copy_from(&c2.transpose());
        c.fixed_view_mut::<2, 2>(2, 2).copy_from(&c3);
        Self::new(c)
    }

    pub fn c(&self) -> &Matrix4<f64> {
        &self.c
    }

    /// `(T₁, T₂)` with `T₁ = C₁ − C₂ᵀC₃⁻¹C₂` and `T₂ = −C₃⁻¹C₂`.
    pub fn decompose(&self) -> (Matrix2<f64>, Matrix2<f64>) {
        (self.t1, self.t2)
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn norm_const(&self) -> f64 {
        self.log_norm.exp()
    }

    pub fn pdf(&self, x: &Se2Point) -> f64 {
        let v = x.to_vector();
        ((v.transpose() * self.c * v)[(0, 0)] - self.log_norm).exp()
    }

    /// Conditional translation covariance `−½C₃⁻¹`.
    pub fn translation_covariance(&self) -> Matrix2<f64> {
        -0.5 * self.c3.try_inverse().expect("validated C₃")
    }

    /// `x_s` along the dominant eigenvector of `T₁`, `x_t = T₂x_s`. The
    /// antipodal point is equally likely.
    pub fn mode(&self) -> Result<Se2Point> {
        let (t, v) = eigen2(&self.t1);
        if t[1] - t[0] <= 1e-12 * (1.0 + t[1].abs()) {
            return Err(Error::Degenerate("T₁ has a repeated eigenvalue; the mode is not unique".into()));
        }
        let mut s = v[1];
        if s[0] < 0.0 || (s[0] == 0.0 && s[1] < 0.0) {
            s = -s;
        }
        Ok(self.point(s))
    }

    fn point(&self, s: Vector2<f64>) -> Se2Point {
        let t = self.t2 * s;
        Se2Point {
            angle_pair: [s[0], s[1]],
            translation: [t[0], t[1]],
        }
    }

    /// The angle of `x_s` has density `∝ exp(a cos 2(θ − φ))`, i.e. its
    /// double is von Mises distributed.
    fn doubled_angle(&self) -> (f64, f64) {
        let (t, v) = eigen2(&self.t1);
        (2.0 * v[1][1].atan2(v[1][0]), 0.5 * (t[1] - t[0]))
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Se2Point> {
        let (mu, a) = self.doubled_angle();
        let vm = VonMises::new(mu, a).expect("bounded concentration");
        let l = self.translation_covariance().cholesky().expect("positive definite").l();
        vm.sample(n, rng)
            .into_iter()
            .map(|psi| {
                let theta = 0.5 * psi.value() + if rng.random::<bool>() { PI } else { 0.0 };
                let s = Vector2::new(theta.cos(), theta.sin());
                let z = Vector2::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
                let t = self.t2 * s + l * z;
                Se2Point {
                    angle_pair: [s[0], s[1]],
                    translation: [t[0], t[1]],
                }
            })
            .collect()
    }

    /// Five weighted points: the doubled angle is replaced by its
    /// five-component Dirac approximation (first two moments preserved) and
    /// each angle carries its conditional translation mean.
    pub fn sample_deterministic(&self) -> Result<(Vec<Se2Point>, Vec<f64>)> {
        let (mu, a) = self.doubled_angle();
        let d = VonMises::new(mu, a)?.to_dirac5()?;
        let pts = d
            .positions()
            .iter()
            .map(|psi| {
                let theta = 0.5 * psi.value();
                self.point(Vector2::new(theta.cos(), theta.sin()))
            })
            .collect();
        Ok((pts, d.weights().to_vec()))
    }

    /// `E[x xᵀ]` in closed form; the mean is zero by antipodal symmetry.
    pub fn covariance(&self) -> Matrix4<f64> {
        let (mu, a) = self.doubled_angle();
        let r = bessel_ratio(2, a);
        // E[x_s x_sᵀ] = ½ (I + r R(mu)) with R the doubled-angle reflection
        let (s2, c2) = mu.sin_cos();
        let s = Matrix2::new(0.5 * (1.0 + r * c2), 0.5 * r * s2, 0.5 * r * s2, 0.5 * (1.0 - r * c2));
        let cross = self.t2 * s;
        let tt = self.translation_covariance() + self.t2 * s * self.t2.transpose();
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&s);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&cross);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&cross.transpose());
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&tt);
        m
    }

    /// Empirical covariance of `n` seeded draws.
    pub fn covariance_mcmc(&self, n: usize, rng: &mut dyn RngCore) -> Matrix4<f64> {
        let v: Vec<Vector4<f64>> = self.sample(n, rng).iter().map(|p| p.to_vector()).collect();
        weighted_moments(&v, &vec![1.0; n]).1
    }

    /// Maximum likelihood. The density factors into an `S¹` Bingham on `x_s`
    /// and a Gaussian `x_t | x_s` with mean `T₂x_s`, so `T₂` and `C₃` come
    /// from weighted least squares and `T₁` from the doubled-angle resultant.
    pub fn fit(samples: &[Se2Point], weights: &[f64]) -> Result<Self> {
        if samples.len() != weights.len() || samples.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: samples.len(),
                found: weights.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::param("weights", "must have positive sum"));
        }
        let mut ss = Matrix2::zeros();
        let mut ts = Matrix2::zeros();
        for (p, &w) in samples.iter().zip(weights) {
            let s = Vector2::from(p.angle_pair);
            let t = Vector2::from(p.translation);
            ss += s * s.transpose() * (w / total);
            ts += t * s.transpose() * (w / total);
        }
        let t2 = ts * ss.try_inverse().ok_or_else(|| Error::Degenerate("angles are collinear".into()))?;
        let mut res = Matrix2::zeros();
        for (p, &w) in samples.iter().zip(weights) {
            let r = Vector2::from(p.translation) - t2 * Vector2::from(p.angle_pair);
            res += r * r.transpose() * (w / total);
        }
        let res_inv = res
            .try_inverse()
            .filter(|_| res.determinant() > 1e-300)
            .ok_or_else(|| Error::Degenerate("translation residuals are singular".into()))?;
        let c3 = -0.5 * res_inv;
        let (sv, v) = eigen2(&ss);
        let a = inverse_bessel_ratio(2, (sv[1] - sv[0]).clamp(0.0, 1.0 - 1e-15))?;
        let t1 = v[1] * v[1].transpose() * (2.0 * a);
        let c2 = -c3 * t2;
        let c1 = t1 + c2.transpose() * c3.try_inverse().expect("definite") * c2;
        Self::from_blocks((c1 + c1.transpose()) * 0.5, c2, (c3 + c3.transpose()) * 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_box;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn generic() -> Se2Bingham {
        Se2Bingham::from_blocks(
            Matrix2::new(-1.0, 0.4, 0.4, 0.5),
            Matrix2::new(0.3, -0.2, 0.1, 0.6),
            Matrix2::new(-1.2, 0.3, 0.3, -0.8),
        )
        .unwrap()
    }

    fn numeric_norm(b: &Se2Bingham) -> f64 {
        let sd = b.translation_covariance().symmetric_eigenvalues().max().sqrt();
        let reach = b.t2.abs().max() * 2.0 + 9.0 * sd;
        let integrand = |v: &[f64]| {
            let x = Vector4::new(v[0].cos(), v[0].sin(), v[1], v[2]);
            (x.transpose() * b.c * x)[(0, 0)].exp()
        };
        integrate_box(integrand, &[(0.0, TWO_PI), (-reach, reach), (-reach, reach)], 1e-6 * b.norm_const()).unwrap()
    }

    #[test]
    fn decoupled_case() {
        let c3 = Matrix2::new(-2.0, 0.5, 0.5, -1.0);
        let b = Se2Bingham::from_blocks(Matrix2::zeros(), Matrix2::zeros(), c3).unwrap();
        let want = TWO_PI * PI / (-c3).determinant().sqrt();
        assert!((b.norm_const() / want - 1.0).abs() < 1e-14);
        let (t1, t2) = b.decompose();
        assert_eq!(t1, Matrix2::zeros());
        assert_eq!(t2, Matrix2::zeros());
        assert!(b.mode().is_err());
        let m = Se2Bingham::from_blocks(Matrix2::new(2.0, 0.0, 0.0, 0.0), Matrix2::zeros(), c3).unwrap().mode().unwrap();
        assert!((m.angle_pair[0] - 1.0).abs() < 1e-15 && m.translation == [0.0, 0.0]);
        let c2 = Matrix2::new(0.3, -0.2, 0.1, 0.6);
        let unit = Se2Bingham::from_blocks(Matrix2::zeros(), c2, -Matrix2::identity()).unwrap();
        assert!((unit.decompose().1 - c2).amax() < 1e-15);
    }

    #[test]
    fn rejects_block_violations() {
        let c2 = Matrix2::zeros();
        assert!(Se2Bingham::from_blocks(Matrix2::new(0.0, 1.0, 0.0, 0.0), c2, -Matrix2::identity()).is_err());
        assert!(Se2Bingham::from_blocks(Matrix2::zeros(), c2, Matrix2::new(-1.0, 0.0, 0.0, 0.5)).is_err());
        assert!(Se2Bingham::from_blocks(Matrix2::zeros(), c2, Matrix2::new(-1.0, 0.2, 0.0, -1.0)).is_err());
    }

    #[test]
    fn decomposition_reconstructs_density() {
        let b = generic();
        let (t1, t2) = b.decompose();
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..100 {
            let th: f64 = rng.random::<f64>() * TWO_PI;
            let s = Vector2::new(th.cos(), th.sin());
            let t = Vector2::new(rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0);
            let r = t - t2 * s;
            let decomposed = ((s.transpose() * t1 * s)[(0, 0)] + (r.transpose() * b.c3 * r)[(0, 0)] - b.log_norm()).exp();
            let p = Se2Point { angle_pair: [s[0], s[1]], translation: [t[0], t[1]] };
            assert!((b.pdf(&p) - decomposed).abs() <= 1e-10 * decomposed);
            let delta = t - t2 * s;
            let mirrored = Se2Point { angle_pair: [-s[0], -s[1]], translation: [(-t2 * s + delta)[0], (-t2 * s + delta)[1]] };
            assert!((b.pdf(&p) - b.pdf(&mirrored)).abs() <= 1e-12 * b.pdf(&p));
        }
    }

    #[test]
    fn norm_const_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let mut draws = vec![generic()];
        while draws.len() < 6 {
            let u = |rng: &mut ChaCha8Rng| rng.random::<f64>() * 2.0 - 1.0;
            let c1 = Matrix2::new(2.0 * u(&mut rng), u(&mut rng), 0.0, 2.0 * u(&mut rng));
            let c1 = Matrix2::new(c1[(0, 0)], c1[(0, 1)], c1[(0, 1)], c1[(1, 1)]);
            let c2 = Matrix2::from_fn(|_, _| u(&mut rng));
            let a = Matrix2::from_fn(|_, _| u(&mut rng));
            let c3 = -(a * a.transpose() + Matrix2::identity() * 0.5);
            draws.push(Se2Bingham::from_blocks(c1, c2, c3).unwrap());
        }
        for b in draws {
            let num = numeric_norm(&b);
            assert!((num / b.norm_const() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn sampler_and_covariances_agree() {
        let b = generic();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let n = 100_000;
        let emp = b.covariance_mcmc(n, &mut rng);
        let exact = b.covariance();
        for i in 0..4 {
            for j in 0..4 {
                let se = (3.0 * exact[(i, i)] * exact[(j, j)] / n as f64).sqrt();
                assert!((emp[(i, j)] - exact[(i, j)]).abs() < 3.0 * se, "{i},{j}");
            }
        }
        let q = integrate_box(
            |v| {
                let x = Vector4::new(v[0].cos(), v[0].sin(), v[1], v[2]);
                x[0] * x[2] * (x.transpose() * b.c * x)[(0, 0)].exp()
            },
            &[(0.0, TWO_PI), (-12.0, 12.0), (-12.0, 12.0)],
            1e-7,
        )
        .unwrap()
            / b.norm_const();
        assert!((q - exact[(0, 2)]).abs() < 1e-5);
    }

    #[test]
    fn fit_recovers_mode() {
        let b = generic();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let s = b.sample(20_000, &mut rng);
        let f = Se2Bingham::fit(&s, &vec![1.0; s.len()]).unwrap();
        let (m, mf) = (b.mode().unwrap(), f.mode().unwrap());
        let dot = m.angle_pair[0] * mf.angle_pair[0] + m.angle_pair[1] * mf.angle_pair[1];
        assert!(dot.abs() >= 0.99);
        assert!((f.decompose().1 - b.decompose().1).amax() < 0.05);
        let (pts, w) = b.sample_deterministic().unwrap();
        assert_eq!(pts.len(), 5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
