//! Closed sum of every circular distribution, with JSON serialization.

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::*;
use crate::fourier::FourierDensity;

/// Any circular distribution, including the density-free Dirac mixture.
#[derive(Debug, Clone)]
pub enum CircularDistribution {
    Uniform(CircularUniform),
    Wn(WrappedNormal),
    Vm(VonMises),
    Wc(WrappedCauchy),
    We(WrappedExponential),
    Wl(WrappedLaplace),
    Gvm(GeneralizedVonMises),
    Pwc(PiecewiseConstant),
    Mixture(CircularMixture),
    Fourier(FourierDensity),
    Wd(WrappedDiracMixture),
    /// Not serializable.
    Custom(CustomCircular),
}

macro_rules! from_impls {
    ($($variant:ident($ty:ty)),* $(,)?) => {
        $(impl From<$ty> for CircularDistribution {
            fn from(v: $ty) -> Self {
                CircularDistribution::$variant(v)
            }
        })*
    };
}

from_impls!(
    Uniform(CircularUniform),
    Wn(WrappedNormal),
    Vm(VonMises),
    Wc(WrappedCauchy),
    We(WrappedExponential),
    Wl(WrappedLaplace),
    Gvm(GeneralizedVonMises),
    Pwc(PiecewiseConstant),
    Mixture(CircularMixture),
    Fourier(FourierDensity),
    Wd(WrappedDiracMixture),
    Custom(CustomCircular),
);

impl CircularDistribution {
    /// Tag used in the JSON representation.
    pub fn type_name(&self) -> &'static str {
        use CircularDistribution::*;
        match self {
            Uniform(_) => "uniform",
            Wn(_) => "wn",
            Vm(_) => "vm",
            Wc(_) => "wc",
            We(_) => "we",
            Wl(_) => "wl",
            Gvm(_) => "gvm",
            Pwc(_) => "pwc",
            Mixture(_) => "mixture",
            Fourier(_) => "fourier",
            Wd(_) => "wd",
            Custom(_) => "custom",
        }
    }

    /// The density view, absent for Dirac mixtures.
    pub fn density(&self) -> Option<&dyn CircularDensity> {
        use CircularDistribution::*;
        Some(match self {
            Uniform(d) => d,
            Wn(d) => d,
            Vm(d) => d,
            Wc(d) => d,
            We(d) => d,
            Wl(d) => d,
            Gvm(d) => d,
            Pwc(d) => d,
            Mixture(d) => d,
            Fourier(d) => d,
            Custom(d) => d,
            Wd(_) => return None,
        })
    }

    fn require_density(&self) -> Result<&dyn CircularDensity> {
        self.density().ok_or(Error::NoDensity)
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        Ok(self.require_density()?.pdf(x))
    }

    pub fn trigonometric_moment(&self, k: i32) -> Complex64 {
        match self {
            CircularDistribution::Wd(d) => d.trigonometric_moment(k),
            other => other.density().expect("non-Dirac").trigonometric_moment(k),
        }
    }

    /// Quadrature path; for Dirac mixtures the discrete sum.
    pub fn trigonometric_moment_numerical(&self, k: i32) -> Complex64 {
        match self {
            CircularDistribution::Wd(d) => d.trigonometric_moment(k),
            other => other.density().expect("non-Dirac").trigonometric_moment_numerical(k),
        }
    }

    pub fn circular_mean(&self) -> Result<Angle> {
        mean_from_moment(self.trigonometric_moment(1))
    }

    pub fn circular_variance(&self) -> f64 {
        1.0 - self.trigonometric_moment(1).norm()
    }

    pub fn entropy(&self) -> Result<f64> {
        self.require_density()?.entropy()
    }

    pub fn cdf(&self, x: f64, start: f64) -> Result<f64> {
        self.require_density()?.cdf(x, start)
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Angle> {
        match self {
            CircularDistribution::Wd(d) => d.sample(n, rng),
            other => other.density().expect("non-Dirac").sample(n, rng),
        }
    }

    pub fn to_dirac3(&self) -> Result<WrappedDiracMixture> {
        dirac3_from_moment(self.trigonometric_moment(1))
    }

    pub fn to_dirac5(&self) -> Result<WrappedDiracMixture> {
        dirac5_from_moments(self.trigonometric_moment(1), self.trigonometric_moment(2))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Serialize)]
#[serde(tag = "type")]
enum ReprRef<'a> {
    #[serde(rename = "uniform")]
    Uniform { params: &'a CircularUniform },
    #[serde(rename = "wn")]
    Wn { params: &'a WrappedNormal },
    #[serde(rename = "vm")]
    Vm { params: &'a VonMises },
    #[serde(rename = "wc")]
    Wc { params: &'a WrappedCauchy },
    #[serde(rename = "we")]
    We { params: &'a WrappedExponential },
    #[serde(rename = "wl")]
    Wl { params: &'a WrappedLaplace },
    #[serde(rename = "gvm")]
    Gvm { params: &'a GeneralizedVonMises },
    #[serde(rename = "pwc")]
    Pwc { params: &'a PiecewiseConstant },
    #[serde(rename = "mixture")]
    Mixture { params: &'a CircularMixture },
    #[serde(rename = "fourier")]
    Fourier(&'a FourierDensity),
    #[serde(rename = "wd")]
    Wd { params: &'a WrappedDiracMixture },
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum Repr {
    #[serde(rename = "uniform")]
    Uniform { params: CircularUniform },
    #[serde(rename = "wn")]
    Wn { params: WrappedNormal },
    #[serde(rename = "vm")]
    Vm { params: VonMises },
    #[serde(rename = "wc")]
    Wc { params: WrappedCauchy },
    #[serde(rename = "we")]
    We { params: WrappedExponential },
    #[serde(rename = "wl")]
    Wl { params: WrappedLaplace },
    #[serde(rename = "gvm")]
    Gvm { params: GeneralizedVonMises },
    #[serde(rename = "pwc")]
    Pwc { params: PiecewiseConstant },
    #[serde(rename = "mixture")]
    Mixture { params: CircularMixture },
    #[serde(rename = "fourier")]
    Fourier(FourierDensity),
    #[serde(rename = "wd")]
    Wd { params: WrappedDiracMixture },
}

impl Serialize for CircularDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use CircularDistribution as D;
        let r = match self {
            D::Uniform(params) => ReprRef::Uniform { params },
            D::Wn(params) => ReprRef::Wn { params },
            D::Vm(params) => ReprRef::Vm { params },
            D::Wc(params) => ReprRef::Wc { params },
            D::We(params) => ReprRef::We { params },
            D::Wl(params) => ReprRef::Wl { params },
            D::Gvm(params) => ReprRef::Gvm { params },
            D::Pwc(params) => ReprRef::Pwc { params },
            D::Mixture(params) => ReprRef::Mixture { params },
            D::Fourier(fd) => ReprRef::Fourier(fd),
            D::Wd(params) => ReprRef::Wd { params },
            D::Custom(_) => {
                return Err(serde::ser::Error::custom(
                    "custom densities hold a callable and cannot be serialized",
                ))
            }
        };
        r.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CircularDistribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use CircularDistribution as C;
        Ok(match Repr::deserialize(d)? {
            Repr::Uniform { params } => C::Uniform(params),
            Repr::Wn { params } => C::Wn(params),
            Repr::Vm { params } => C::Vm(params),
            Repr::Wc { params } => C::Wc(params),
            Repr::We { params } => C::We(params),
            Repr::Wl { params } => C::Wl(params),
            Repr::Gvm { params } => C::Gvm(params),
            Repr::Pwc { params } => C::Pwc(params),
            Repr::Mixture { params } => C::Mixture(params),
            Repr::Fourier(fd) => C::Fourier(fd),
            Repr::Wd { params } => C::Wd(params),
        })
    }
}
