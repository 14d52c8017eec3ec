//! Closed sum of every hyperspherical distribution, with JSON serialization.

use nalgebra::DMatrix;
use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::*;

#[derive(Debug, Clone)]
pub enum HypersphericalDistribution {
    Vmf(VonMisesFisher),
    Watson(WatsonDist),
    Bingham(BinghamDist),
    Uniform(HypersphericalUniform),
    Dirac(SphericalDiracMixture),
}

macro_rules! from_impls {
    ($($variant:ident($ty:ty)),* $(,)?) => {
        $(impl From<$ty> for HypersphericalDistribution {
            fn from(v: $ty) -> Self {
                HypersphericalDistribution::$variant(v)
            }
        })*
    };
}

from_impls!(
    Vmf(VonMisesFisher),
    Watson(WatsonDist),
    Bingham(BinghamDist),
    Uniform(HypersphericalUniform),
    Dirac(SphericalDiracMixture),
);

impl HypersphericalDistribution {
    pub fn type_name(&self) -> &'static str {
        use HypersphericalDistribution::*;
        match self {
            Vmf(_) => "vmf",
            Watson(_) => "watson",
            Bingham(_) => "bingham",
            Uniform(_) => "hyperspherical_uniform",
            Dirac(_) => "spherical_dirac",
        }
    }

    pub fn density(&self) -> Option<&dyn HypersphericalDensity> {
        use HypersphericalDistribution::*;
        Some(match self {
            Vmf(d) => d,
            Watson(d) => d,
            Bingham(d) => d,
            Uniform(d) => d,
            Dirac(_) => return None,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            HypersphericalDistribution::Dirac(d) => d.dim(),
            other => other.density().expect("density variant").dim(),
        }
    }

    /// Density at a unit vector `x`.
    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        check_unit_point(self.dim(), x)?;
        self.density().map(|d| d.pdf(x)).ok_or(Error::NoDensity)
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        match self {
            HypersphericalDistribution::Dirac(d) => d.sample(n, rng),
            other => other.density().expect("density variant").sample(n, rng),
        }
    }

    /// `E[x xᵀ]`: closed form for Bingham and Dirac, quadrature otherwise.
    pub fn scatter(&self) -> Result<DMatrix<f64>> {
        use HypersphericalDistribution::*;
        match self {
            Bingham(b) => b.scatter(),
            Dirac(d) => Ok(d.scatter()),
            Uniform(u) => Ok(DMatrix::identity(u.dim(), u.dim()) / u.dim() as f64),
            other => scatter_numerical(other.density().expect("density variant")),
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
    #[serde(rename = "vmf")]
    Vmf { params: &'a VonMisesFisher },
    #[serde(rename = "watson")]
    Watson { params: &'a WatsonDist },
    #[serde(rename = "bingham")]
    Bingham { params: &'a BinghamDist },
    #[serde(rename = "hyperspherical_uniform")]
    Uniform { params: &'a HypersphericalUniform },
    #[serde(rename = "spherical_dirac")]
    Dirac { params: &'a SphericalDiracMixture },
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum Repr {
    #[serde(rename = "vmf")]
    Vmf { params: VonMisesFisher },
    #[serde(rename = "watson")]
    Watson { params: WatsonDist },
    #[serde(rename = "bingham")]
    Bingham { params: BinghamDist },
    #[serde(rename = "hyperspherical_uniform")]
    Uniform { params: HypersphericalUniform },
    #[serde(rename = "spherical_dirac")]
    Dirac { params: SphericalDiracMixture },
}

impl Serialize for HypersphericalDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use HypersphericalDistribution as D;
        match self {
            D::Vmf(params) => ReprRef::Vmf { params },
            D::Watson(params) => ReprRef::Watson { params },
            D::Bingham(params) => ReprRef::Bingham { params },
            D::Uniform(params) => ReprRef::Uniform { params },
            D::Dirac(params) => ReprRef::Dirac { params },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HypersphericalDistribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use HypersphericalDistribution as H;
        Ok(match Repr::deserialize(d)? {
            Repr::Vmf { params } => H::Vmf(params),
            Repr::Watson { params } => H::Watson(params),
            Repr::Bingham { params } => H::Bingham(params),
            Repr::Uniform { params } => H::Uniform(params),
            Repr::Dirac { params } => H::Dirac(params),
        })
    }
}
