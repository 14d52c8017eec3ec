//! Angle arithmetic, quadrature and special functions shared by every
//! distribution family.

mod quadrature;
mod special;

pub use quadrature::{
    default_tol, integrate, integrate_box, integrate_periodic, integrate_sphere, sphere_area,
};
pub use special::{
    bessel_i, bessel_i_ratio, bessel_ratio, inverse_bessel_ratio, kummer_1f1_elementary,
    kummer_1f1_log_derivative, kummer_m, ln_gamma, log_bessel_i, log_kummer_1f1_elementary,
    log_kummer_m, erf, normal_cdf,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

pub use num_complex::Complex64;

pub const TWO_PI: f64 = 2.0 * PI;

/// An angle in radians, always stored in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(theta: f64) -> Result<Self> {
        wrap(theta)
    }

    /// Wraps without the finiteness check; NaN propagates.
    pub(crate) fn wrapped(theta: f64) -> Self {
        Angle(wrap_f64(theta))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }

    /// Unit complex number `exp(i·self)`.
    pub fn to_unit(self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Angle::wrapped(z.im.atan2(z.re))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        wrap(v)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl std::ops::Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle::wrapped(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle::wrapped(self.0 - rhs.0)
    }
}

/// `theta mod 2π` in `[0, 2π)` without validation.
#[inline]
pub fn wrap_f64(theta: f64) -> f64 {
    let r = theta.rem_euclid(TWO_PI);
    // rem_euclid of a tiny negative number rounds up to exactly 2π
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// Reduces `theta` modulo 2π into `[0, 2π)`.
pub fn wrap(theta: f64) -> Result<Angle> {
    if !theta.is_finite() {
        return Err(Error::NonFinite(theta));
    }
    Ok(Angle(wrap_f64(theta)))
}

/// Length of the shorter arc between two angles, in `[0, π]`.
pub fn angular_distance(a: Angle, b: Angle) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(TWO_PI - d)
}
