//! Closed sum of every hypertoroidal distribution, with JSON serialization.

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::sync::Arc;

use super::*;

#[derive(Debug, Clone)]
pub enum HypertoroidalDistribution {
    Uniform(HypertoroidalUniform),
    Hwn(HypertoroidalWN),
    TvmSine(ToroidalVMSine),
    TvmMatrix(ToroidalVMMatrix),
    Fourier(HypertoroidalFourier),
    Mixture(HypertoroidalMixture),
    Hwd(HypertoroidalWD),
    /// Not serializable.
    Custom(CustomHypertoroidal),
}

macro_rules! from_impls {
    ($($variant:ident($ty:ty)),* $(,)?) => {
        $(impl From<$ty> for HypertoroidalDistribution {
            fn from(v: $ty) -> Self {
                HypertoroidalDistribution::$variant(v)
            }
        })*
    };
}

from_impls!(
    Uniform(HypertoroidalUniform),
    Hwn(HypertoroidalWN),
    TvmSine(ToroidalVMSine),
    TvmMatrix(ToroidalVMMatrix),
    Fourier(HypertoroidalFourier),
    Mixture(HypertoroidalMixture),
    Hwd(HypertoroidalWD),
    Custom(CustomHypertoroidal),
);

impl HypertoroidalDistribution {
    pub fn type_name(&self) -> &'static str {
        use HypertoroidalDistribution::*;
        match self {
            Uniform(_) => "hypertoroidal_uniform",
            Hwn(_) => "hwn",
            TvmSine(_) => "tvm_sine",
            TvmMatrix(_) => "tvm_matrix",
            Fourier(_) => "hypertoroidal_fourier",
            Mixture(_) => "hypertoroidal_mixture",
            Hwd(_) => "hwd",
            Custom(_) => "custom",
        }
    }

    /// The density, or `None` for the Dirac mixture.
    pub fn density(&self) -> Option<&dyn HypertoroidalDensity> {
        use HypertoroidalDistribution::*;
        Some(match self {
            Uniform(d) => d,
            Hwn(d) => d,
            TvmSine(d) => d,
            TvmMatrix(d) => d,
            Fourier(d) => d,
            Mixture(d) => d,
            Custom(d) => d,
            Hwd(_) => return None,
        })
    }

    fn arc_density(&self) -> Option<Arc<dyn HypertoroidalDensity>> {
        use HypertoroidalDistribution::*;
        Some(match self.clone() {
            Uniform(d) => Arc::new(d),
            Hwn(d) => Arc::new(d),
            TvmSine(d) => Arc::new(d),
            TvmMatrix(d) => Arc::new(d),
            Fourier(d) => Arc::new(d),
            Mixture(d) => Arc::new(d),
            Custom(d) => Arc::new(d),
            Hwd(_) => return None,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            HypertoroidalDistribution::Hwd(d) => d.dim(),
            other => other.density().expect("density variant").dim(),
        }
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        check_point(self.dim(), x)?;
        self.density().map(|d| d.pdf(x)).ok_or(Error::NoDensity)
    }

    pub fn trigonometric_moment(&self, k: &[i32]) -> Result<Complex64> {
        check_point(self.dim(), &vec![0.0; k.len()])?;
        Ok(match self {
            HypertoroidalDistribution::Hwd(d) => d.trigonometric_moment(k),
            other => other.density().expect("density variant").trigonometric_moment(k),
        })
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        match self {
            HypertoroidalDistribution::Hwd(d) => d.sample(n, rng),
            other => other.density().expect("density variant").sample(n, rng),
        }
    }

    fn moment2(&self) -> Result<impl Fn(i32, i32) -> Complex64 + '_> {
        if self.dim() != 2 {
            return Err(Error::Unsupported("four-dimensional summaries need d = 2".into()));
        }
        Ok(move |a: i32, b: i32| self.trigonometric_moment(&[a, b]).expect("d = 2"))
    }

    pub fn mean4d(&self) -> Result<Vector4<f64>> {
        Ok(mean4d_from_moments(&self.moment2()?))
    }

    pub fn covariance4d(&self) -> Result<Matrix4<f64>> {
        Ok(covariance4d_from_moments(&self.moment2()?))
    }

    pub fn correlation_jammalamadaka(&self) -> Result<f64> {
        correlation_jammalamadaka_from_moments(&self.moment2()?)
    }

    pub fn correlation_johnson(&self) -> Result<f64> {
        correlation_johnson_from_moments(&self.moment2()?)
    }

    pub fn correlation_jupp(&self) -> Result<f64> {
        correlation_jupp_from_moments(&self.moment2()?)
    }

    /// Marginal of axis `dim` (zero-based). Closed form for the wrapped
    /// normal, Dirac, uniform and Fourier cases, numerical otherwise.
    pub fn marginalize_to_1d(&self, dim: usize) -> Result<CircularDistribution> {
        use HypertoroidalDistribution::*;
        if dim >= self.dim() {
            return Err(Error::param("dimension", "axis out of range"));
        }
        match self {
            Hwn(d) => d.marginalize_to_1d(dim),
            Hwd(d) => Ok(d.marginalize_to_1d(dim)?.into()),
            Uniform(_) => Ok(crate::circular::CircularUniform::new().into()),
            Fourier(d) => d.marginalize_to_1d(dim),
            other => numeric_marginal(other.arc_density().expect("density variant"), dim),
        }
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
    #[serde(rename = "hypertoroidal_uniform")]
    Uniform { params: &'a HypertoroidalUniform },
    #[serde(rename = "hwn")]
    Hwn { params: &'a HypertoroidalWN },
    #[serde(rename = "tvm_sine")]
    TvmSine { params: &'a ToroidalVMSine },
    #[serde(rename = "tvm_matrix")]
    TvmMatrix { params: &'a ToroidalVMMatrix },
    #[serde(rename = "hypertoroidal_fourier")]
    Fourier(&'a HypertoroidalFourier),
    #[serde(rename = "hypertoroidal_mixture")]
    Mixture { params: &'a HypertoroidalMixture },
    #[serde(rename = "hwd")]
    Hwd { params: &'a HypertoroidalWD },
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum Repr {
    #[serde(rename = "hypertoroidal_uniform")]
    Uniform { params: HypertoroidalUniform },
    #[serde(rename = "hwn")]
    Hwn { params: HypertoroidalWN },
    #[serde(rename = "tvm_sine")]
    TvmSine { params: ToroidalVMSine },
    #[serde(rename = "tvm_matrix")]
    TvmMatrix { params: ToroidalVMMatrix },
    #[serde(rename = "hypertoroidal_fourier")]
    Fourier(HypertoroidalFourier),
    #[serde(rename = "hypertoroidal_mixture")]
    Mixture { params: HypertoroidalMixture },
    #[serde(rename = "hwd")]
    Hwd { params: HypertoroidalWD },
}

impl Serialize for HypertoroidalDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use HypertoroidalDistribution as D;
        let r = match self {
            D::Uniform(params) => ReprRef::Uniform { params },
            D::Hwn(params) => ReprRef::Hwn { params },
            D::TvmSine(params) => ReprRef::TvmSine { params },
            D::TvmMatrix(params) => ReprRef::TvmMatrix { params },
            D::Fourier(f) => ReprRef::Fourier(f),
            D::Mixture(params) => ReprRef::Mixture { params },
            D::Hwd(params) => ReprRef::Hwd { params },
            D::Custom(_) => {
                return Err(serde::ser::Error::custom(
                    "custom densities hold a callable and cannot be serialized",
                ))
            }
        };
        r.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HypertoroidalDistribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use HypertoroidalDistribution as H;
        Ok(match Repr::deserialize(d)? {
            Repr::Uniform { params } => H::Uniform(params),
            Repr::Hwn { params } => H::Hwn(params),
            Repr::TvmSine { params } => H::TvmSine(params),
            Repr::TvmMatrix { params } => H::TvmMatrix(params),
            Repr::Fourier(f) => H::Fourier(f),
            Repr::Mixture { params } => H::Mixture(params),
            Repr::Hwd { params } => H::Hwd(params),
        })
    }
}
