//! Wrapped normal, Cauchy, exponential and Laplace distributions.

use rand::RngCore;
use rand_distr::{Cauchy, Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{positive, CircularDensity};
use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, wrap, wrap_f64, Angle, Complex64, TWO_PI};

/// Smallest admissible wrapped normal standard deviation.
pub const MIN_SIGMA: f64 = 1e-6;

/// Mass of the counterclockwise arc `start → x` given the cdf on `[0, 2π)`
/// measured from zero.
pub(crate) fn arc_mass(cdf0: impl Fn(f64) -> f64, x: f64, start: f64) -> f64 {
    let span = wrap_f64(x - start);
    if span == 0.0 {
        return 0.0;
    }
    let (xs, ss) = (wrap_f64(x), wrap_f64(start));
    let mut m = cdf0(xs) - cdf0(ss);
    if xs < ss {
        m += 1.0;
    }
    m.clamp(0.0, 1.0)
}

/// Number of wrap offsets on each side for a Gaussian of standard
/// deviation `sigma`. Excluded terms lie at least 8σ away.
pub(crate) fn wrap_terms(sigma: f64) -> i64 {
    ((8.0 * sigma / TWO_PI).ceil() as i64 + 1).max(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WnParams")]
pub struct WrappedNormal {
    mu: Angle,
    sigma: f64,
}

#[derive(Deserialize)]
struct WnParams {
    mu: f64,
    sigma: f64,
}

impl TryFrom<WnParams> for WrappedNormal {
    type Error = Error;
    fn try_from(p: WnParams) -> Result<Self> {
        WrappedNormal::new(p.mu, p.sigma)
    }
}

impl WrappedNormal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let sigma = positive("sigma", sigma)?;
        if sigma < MIN_SIGMA {
            return Err(Error::Degenerate(format!(
                "sigma {sigma} below {MIN_SIGMA}"
            )));
        }
        Ok(Self { mu: wrap(mu)?, sigma })
    }

    pub fn mu(&self) -> Angle {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Density evaluated with an explicit number of wrap offsets per side.
    pub fn pdf_with_terms(&self, x: f64, k: i64) -> f64 {
        let d = wrap_f64(x) - self.mu.value();
        let s2 = 2.0 * self.sigma * self.sigma;
        let sum: f64 = (-k..=k)
            .map(|j| {
                let t = d + TWO_PI * j as f64;
                (-t * t / s2).exp()
            })
            .sum();
        sum / (self.sigma * (2.0 * PI).sqrt())
    }

    /// Exact convolution: means add, variances add.
    pub fn convolve(&self, other: &WrappedNormal) -> Result<WrappedNormal> {
        WrappedNormal::new(
            self.mu.value() + other.mu.value(),
            self.sigma.hypot(other.sigma),
        )
    }

    /// Moment-matched fit `μ = arg m1`, `σ = sqrt(−2 ln |m1|)`.
    pub fn from_moment(m1: Complex64) -> Result<WrappedNormal> {
        let r = m1.norm();
        if !r.is_finite() {
            return Err(Error::NonFinite(r));
        }
        if r <= 0.0 {
            return Err(Error::Inadmissible(
                "|m1| = 0 has no finite wrapped normal".into(),
            ));
        }
        if r >= 1.0 {
            return Err(Error::Inadmissible(format!(
                "|m1| = {r} >= 1 is a point mass"
            )));
        }
        WrappedNormal::new(m1.arg(), (-2.0 * r.ln()).sqrt())
    }
}

impl CircularDensity for WrappedNormal {
    fn pdf(&self, x: f64) -> f64 {
        self.pdf_with_terms(x, wrap_terms(self.sigma))
    }

    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        let k = k as f64;
        Complex64::from_polar(
            (-0.5 * k * k * self.sigma * self.sigma).exp(),
            k * self.mu.value(),
        )
    }

    fn cdf(&self, x: f64, start: f64) -> Result<f64> {
        let span = wrap_f64(x - start);
        if span == 0.0 {
            return Ok(0.0);
        }
        let a = wrap_f64(start) - self.mu.value();
        let b = a + span;
        let k = wrap_terms(self.sigma) + 1;
        let m: f64 = (-k..=k)
            .map(|j| {
                let off = TWO_PI * j as f64;
                normal_cdf((b + off) / self.sigma) - normal_cdf((a + off) / self.sigma)
            })
            .sum();
        Ok(m.clamp(0.0, 1.0))
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        let normal = Normal::new(self.mu.value(), self.sigma).expect("validated sigma");
        (0..n).map(|_| Angle::wrapped(normal.sample(rng))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WcParams")]
pub struct WrappedCauchy {
    mu: Angle,
    gamma: f64,
}

#[derive(Deserialize)]
struct WcParams {
    mu: f64,
    gamma: f64,
}

impl TryFrom<WcParams> for WrappedCauchy {
    type Error = Error;
    fn try_from(p: WcParams) -> Result<Self> {
        WrappedCauchy::new(p.mu, p.gamma)
    }
}

impl WrappedCauchy {
    pub fn new(mu: f64, gamma: f64) -> Result<Self> {
        Ok(Self {
            mu: wrap(mu)?,
            gamma: positive("gamma", gamma)?,
        })
    }

    pub fn mu(&self) -> Angle {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl CircularDensity for WrappedCauchy {
    // the wrapping sum has the closed form below, so no truncation is needed
    fn pdf(&self, x: f64) -> f64 {
        let g = self.gamma;
        g.sinh() / (TWO_PI * (g.cosh() - (x - self.mu.value()).cos()))
    }

    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        Complex64::from_polar(
            (-(k.unsigned_abs() as f64) * self.gamma).exp(),
            k as f64 * self.mu.value(),
        )
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        let c = Cauchy::new(self.mu.value(), self.gamma).expect("validated gamma");
        (0..n).map(|_| Angle::wrapped(c.sample(rng))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeParams")]
pub struct WrappedExponential {
    lambda: f64,
}

#[derive(Deserialize)]
struct WeParams {
    lambda: f64,
}

impl TryFrom<WeParams> for WrappedExponential {
    type Error = Error;
    fn try_from(p: WeParams) -> Result<Self> {
        WrappedExponential::new(p.lambda)
    }
}

impl WrappedExponential {
    pub fn new(lambda: f64) -> Result<Self> {
        Ok(Self {
            lambda: positive("lambda", lambda)?,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl CircularDensity for WrappedExponential {
    fn pdf(&self, x: f64) -> f64 {
        let l = self.lambda;
        l * (-l * wrap_f64(x)).exp() / -(-TWO_PI * l).exp_m1()
    }

    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        Complex64::new(1.0, 0.0) / Complex64::new(1.0, -(k as f64) / self.lambda)
    }

    fn cdf(&self, x: f64, start: f64) -> Result<f64> {
        let l = self.lambda;
        let denom = (-TWO_PI * l).exp_m1();
        Ok(arc_mass(|t| (-l * t).exp_m1() / denom, x, start))
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        let e = Exp::new(self.lambda).expect("validated lambda");
        (0..n).map(|_| Angle::wrapped(e.sample(rng))).collect()
    }
}

/// Wrapped asymmetric Laplace with rate `lambda` and asymmetry `kappa`.
///
/// The unwrapped density is `λκ/(1+κ²)·exp(−λκx)` for `x ≥ 0` and
/// `λκ/(1+κ²)·exp(λx/κ)` for `x < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WlParams")]
pub struct WrappedLaplace {
    lambda: f64,
    kappa: f64,
}

#[derive(Deserialize)]
struct WlParams {
    lambda: f64,
    kappa: f64,
}

impl TryFrom<WlParams> for WrappedLaplace {
    type Error = Error;
    fn try_from(p: WlParams) -> Result<Self> {
        WrappedLaplace::new(p.lambda, p.kappa)
    }
}

impl WrappedLaplace {
    pub fn new(lambda: f64, kappa: f64) -> Result<Self> {
        Ok(Self {
            lambda: positive("lambda", lambda)?,
            kappa: positive("kappa", kappa)?,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn scale(&self) -> f64 {
        self.lambda * self.kappa / (1.0 + self.kappa * self.kappa)
    }
}

impl CircularDensity for WrappedLaplace {
    fn pdf(&self, x: f64) -> f64 {
        let (l, k) = (self.lambda, self.kappa);
        let x = wrap_f64(x);
        let right = (-l * k * x).exp() / -(-TWO_PI * l * k).exp_m1();
        let left = (-l * (TWO_PI - x) / k).exp() / -(-TWO_PI * l / k).exp_m1();
        self.scale() * (right + left)
    }

    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        let (l, kap) = (self.lambda, self.kappa);
        let t = k as f64;
        let one = Complex64::new(1.0, 0.0);
        self.scale() * (one / Complex64::new(l * kap, -t) + one / Complex64::new(l / kap, t))
    }

    fn cdf(&self, x: f64, start: f64) -> Result<f64> {
        let (l, k) = (self.lambda, self.kappa);
        let c = self.scale();
        let cdf0 = |t: f64| {
            let right = (-l * k * t).exp_m1() / ((-TWO_PI * l * k).exp_m1() * l * k);
            let left = k / l * ((-l * (TWO_PI - t) / k).exp() - (-TWO_PI * l / k).exp())
                / -(-TWO_PI * l / k).exp_m1();
            c * (right + left)
        };
        Ok(arc_mass(cdf0, x, start))
    }

    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        use rand::Rng;
        let (l, k) = (self.lambda, self.kappa);
        let right = Exp::new(l * k).expect("validated");
        let left = Exp::new(l / k).expect("validated");
        let p_right = 1.0 / (1.0 + k * k);
        (0..n)
            .map(|_| {
                let v = if rng.random::<f64>() < p_right {
                    right.sample(rng)
                } else {
                    -left.sample(rng)
                };
                Angle::wrapped(v)
            })
            .collect()
    }
}
