//! Closed sum of the complex spherical distributions, with JSON serialization.

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::*;

#[derive(Debug, Clone, PartialEq)]
pub enum ComplexDistribution {
    Bingham(ComplexBingham),
    Watson(ComplexWatson),
    Acg(ComplexACG),
    WatsonMixture(ComplexWatsonMixture),
}

macro_rules! from_impls {
    ($($variant:ident($ty:ty)),* $(,)?) => {
        $(impl From<$ty> for ComplexDistribution {
            fn from(v: $ty) -> Self {
                ComplexDistribution::$variant(v)
            }
        })*
    };
}

from_impls!(
    Bingham(ComplexBingham),
    Watson(ComplexWatson),
    Acg(ComplexACG),
    WatsonMixture(ComplexWatsonMixture),
);

impl ComplexDistribution {
    pub fn type_name(&self) -> &'static str {
        match self {
            ComplexDistribution::Bingham(_) => "complex_bingham",
            ComplexDistribution::Watson(_) => "complex_watson",
            ComplexDistribution::Acg(_) => "complex_acg",
            ComplexDistribution::WatsonMixture(_) => "complex_watson_mixture",
        }
    }

    pub fn density(&self) -> &dyn ComplexSphericalDensity {
        match self {
            ComplexDistribution::Bingham(d) => d,
            ComplexDistribution::Watson(d) => d,
            ComplexDistribution::Acg(d) => d,
            ComplexDistribution::WatsonMixture(d) => d,
        }
    }

    pub fn dim(&self) -> usize {
        self.density().dim()
    }

    /// Density at a unit vector `z`.
    pub fn pdf(&self, z: &[Complex64]) -> Result<f64> {
        check_point(self.dim(), z)?;
        Ok(self.density().pdf(z))
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<Complex64>> {
        self.density().sample(n, rng)
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
    #[serde(rename = "complex_bingham")]
    Bingham { params: &'a ComplexBingham },
    #[serde(rename = "complex_watson")]
    Watson { params: &'a ComplexWatson },
    #[serde(rename = "complex_acg")]
    Acg { params: &'a ComplexACG },
    #[serde(rename = "complex_watson_mixture")]
    WatsonMixture { params: &'a ComplexWatsonMixture },
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum Repr {
    #[serde(rename = "complex_bingham")]
    Bingham { params: ComplexBingham },
    #[serde(rename = "complex_watson")]
    Watson { params: ComplexWatson },
    #[serde(rename = "complex_acg")]
    Acg { params: ComplexACG },
    #[serde(rename = "complex_watson_mixture")]
    WatsonMixture { params: ComplexWatsonMixture },
}

impl Serialize for ComplexDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use ComplexDistribution as D;
        match self {
            D::Bingham(params) => ReprRef::Bingham { params },
            D::Watson(params) => ReprRef::Watson { params },
            D::Acg(params) => ReprRef::Acg { params },
            D::WatsonMixture(params) => ReprRef::WatsonMixture { params },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexDistribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use ComplexDistribution as C;
        Ok(match Repr::deserialize(d)? {
            Repr::Bingham { params } => C::Bingham(params),
            Repr::Watson { params } => C::Watson(params),
            Repr::Acg { params } => C::Acg(params),
            Repr::WatsonMixture { params } => C::WatsonMixture(params),
        })
    }
}
