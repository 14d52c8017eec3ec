//! Closed sum of the SE(2) distributions, with JSON serialization.

use nalgebra::{Matrix4, Vector4};
use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::*;

#[derive(Debug, Clone, PartialEq)]
pub enum Se2Distribution {
    Pwn(Se2PartiallyWrappedNormal),
    Pwd(Se2PartiallyWrappedDirac),
    Bingham(Se2Bingham),
}

impl From<Se2PartiallyWrappedNormal> for Se2Distribution {
    fn from(v: Se2PartiallyWrappedNormal) -> Self {
        Se2Distribution::Pwn(v)
    }
}

impl From<Se2PartiallyWrappedDirac> for Se2Distribution {
    fn from(v: Se2PartiallyWrappedDirac) -> Self {
        Se2Distribution::Pwd(v)
    }
}

impl From<Se2Bingham> for Se2Distribution {
    fn from(v: Se2Bingham) -> Self {
        Se2Distribution::Bingham(v)
    }
}

impl Se2Distribution {
    pub fn type_name(&self) -> &'static str {
        match self {
            Se2Distribution::Pwn(_) => "se2_pwn",
            Se2Distribution::Pwd(_) => "se2_pwd",
            Se2Distribution::Bingham(_) => "se2_bingham",
        }
    }

    /// Coordinates per point: `(angle, x, y)` for the partially wrapped
    /// family, `(x_s, x_t)` for the Bingham density.
    pub fn point_dim(&self) -> usize {
        match self {
            Se2Distribution::Bingham(_) => 4,
            _ => 3,
        }
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.point_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.point_dim(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("x", "non-finite coordinate"));
        }
        match self {
            Se2Distribution::Pwn(p) => Ok(p.pdf(x)),
            Se2Distribution::Pwd(_) => Err(Error::NoDensity),
            Se2Distribution::Bingham(b) => Ok(b.pdf(&Se2Point::new([x[0], x[1]], [x[2], x[3]])?)),
        }
    }

    /// Draws as flat coordinate vectors (see [`Self::point_dim`]).
    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        match self {
            Se2Distribution::Pwn(p) => p.sample(n, rng).into_iter().map(|v| v.to_vec()).collect(),
            Se2Distribution::Pwd(p) => p.sample(n, rng).into_iter().map(|v| v.to_vec()).collect(),
            Se2Distribution::Bingham(b) => b
                .sample(n, rng)
                .into_iter()
                .map(|p| p.to_vector().iter().copied().collect())
                .collect(),
        }
    }

    /// Mean of `(cos θ, sin θ, x, y)`, or of `(x_s, x_t)` for Bingham.
    pub fn mean4d(&self) -> Vector4<f64> {
        match self {
            Se2Distribution::Pwn(p) => p.mean4d(),
            Se2Distribution::Pwd(p) => p.mean4d(),
            Se2Distribution::Bingham(_) => Vector4::zeros(),
        }
    }

    pub fn covariance4d(&self) -> Matrix4<f64> {
        match self {
            Se2Distribution::Pwn(p) => p.covariance4d(),
            Se2Distribution::Pwd(p) => p.covariance4d(),
            Se2Distribution::Bingham(b) => b.covariance(),
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
    #[serde(rename = "se2_pwn")]
    Pwn { params: &'a Se2PartiallyWrappedNormal },
    #[serde(rename = "se2_pwd")]
    Pwd { params: &'a Se2PartiallyWrappedDirac },
    #[serde(rename = "se2_bingham")]
    Bingham { params: &'a Se2Bingham },
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum Repr {
    #[serde(rename = "se2_pwn")]
    Pwn { params: Se2PartiallyWrappedNormal },
    #[serde(rename = "se2_pwd")]
    Pwd { params: Se2PartiallyWrappedDirac },
    #[serde(rename = "se2_bingham")]
    Bingham { params: Se2Bingham },
}

impl Serialize for Se2Distribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Se2Distribution::Pwn(params) => ReprRef::Pwn { params },
            Se2Distribution::Pwd(params) => ReprRef::Pwd { params },
            Se2Distribution::Bingham(params) => ReprRef::Bingham { params },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Se2Distribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Pwn { params } => Se2Distribution::Pwn(params),
            Repr::Pwd { params } => Se2Distribution::Pwd(params),
            Repr::Bingham { params } => Se2Distribution::Bingham(params),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix3};

    #[test]
    fn json_round_trip_is_byte_identical() {
        let all: Vec<Se2Distribution> = vec![
            Se2PartiallyWrappedNormal::new([1.0, 0.0, 2.0], Matrix3::new(0.7, 0.3, -0.2, 0.3, 1.5, 0.4, -0.2, 0.4, 0.9))
                .unwrap()
                .into(),
            Se2PartiallyWrappedDirac::new(vec![[0.1, 1.0, 2.0], [3.0, -1.0, 0.5]], vec![0.3, 0.7]).unwrap().into(),
            Se2Bingham::from_blocks(Matrix2::new(-1.0, 0.4, 0.4, 0.5), Matrix2::new(0.3, -0.2, 0.1, 0.6), -Matrix2::identity())
                .unwrap()
                .into(),
        ];
        for d in all {
            let s1 = d.to_json().unwrap();
            let back = Se2Distribution::from_json(&s1).unwrap();
            assert_eq!(back.type_name(), d.type_name());
            assert_eq!(s1, back.to_json().unwrap());
        }
        let p = Se2Point::new([0.6, 0.8], [1.0, -2.0]).unwrap();
        let j = serde_json::to_string(&p).unwrap();
        assert_eq!(j, r#"{"angle_pair":[0.6,0.8],"translation":[1.0,-2.0]}"#);
        assert!(Se2Point::new([0.6, 0.9], [0.0, 0.0]).is_err());
    }
}
