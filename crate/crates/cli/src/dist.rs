//! Distribution JSON of any manifold, dispatched on the `type` tag.

use dirkit::circular::CircularDistribution;
use dirkit::complex::ComplexDistribution;
use dirkit::hypersphere::HypersphericalDistribution;
use dirkit::hypertorus::HypertoroidalDistribution;
use dirkit::se2::Se2Distribution;
use dirkit::Complex64;
use rand::RngCore;

use crate::error::{CliError, CliResult};

const CIRCULAR: &[&str] = &["wn", "vm", "wc", "we", "wl", "uniform", "gvm", "pwc", "wd", "mixture", "fourier"];
const TORUS: &[&str] = &[
    "hwn",
    "hwd",
    "tvm_sine",
    "tvm_matrix",
    "hypertoroidal_fourier",
    "hypertoroidal_uniform",
    "hypertoroidal_mixture",
];
const SPHERE: &[&str] = &["vmf", "watson", "bingham", "hyperspherical_uniform", "spherical_dirac"];
const COMPLEX: &[&str] = &["complex_bingham", "complex_watson", "complex_acg", "complex_watson_mixture"];
const SE2: &[&str] = &["se2_pwn", "se2_pwd", "se2_bingham"];

#[derive(Debug, Clone)]
pub enum AnyDistribution {
    Circular(CircularDistribution),
    Torus(HypertoroidalDistribution),
    Sphere(HypersphericalDistribution),
    Complex(ComplexDistribution),
    Se2(Se2Distribution),
}

impl AnyDistribution {
    pub fn from_json(s: &str) -> CliResult<Self> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| CliError::Usage(format!("malformed JSON: {e}")))?;
        let ty = v
            .get("type")
            .and_then(|t| t.as_str())
            .ok_or_else(|| CliError::Usage("distribution JSON needs a string \"type\" field".into()))?;
        Ok(if CIRCULAR.contains(&ty) {
            AnyDistribution::Circular(CircularDistribution::from_json(s)?)
        } else if TORUS.contains(&ty) {
            AnyDistribution::Torus(HypertoroidalDistribution::from_json(s)?)
        } else if SPHERE.contains(&ty) {
            AnyDistribution::Sphere(HypersphericalDistribution::from_json(s)?)
        } else if COMPLEX.contains(&ty) {
            AnyDistribution::Complex(ComplexDistribution::from_json(s)?)
        } else if SE2.contains(&ty) {
            AnyDistribution::Se2(Se2Distribution::from_json(s)?)
        } else {
            return Err(CliError::Usage(format!("unknown distribution type {ty:?}")));
        })
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(match self {
            AnyDistribution::Circular(d) => d.to_json()?,
            AnyDistribution::Torus(d) => d.to_json()?,
            AnyDistribution::Sphere(d) => d.to_json()?,
            AnyDistribution::Complex(d) => d.to_json()?,
            AnyDistribution::Se2(d) => d.to_json()?,
        })
    }

    /// Column names of a point in flat coordinates.
    pub fn coordinate_names(&self) -> Vec<String> {
        let numbered = |p: &str, n: usize| (1..=n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        match self {
            AnyDistribution::Circular(_) => vec!["x".into()],
            AnyDistribution::Torus(d) => numbered("x", d.dim()),
            AnyDistribution::Sphere(d) => numbered("x", d.dim()),
            AnyDistribution::Complex(d) => (1..=d.dim()).flat_map(|i| [format!("re{i}"), format!("im{i}")]).collect(),
            AnyDistribution::Se2(d) if d.point_dim() == 4 => vec!["c".into(), "s".into(), "x".into(), "y".into()],
            AnyDistribution::Se2(_) => vec!["theta".into(), "x".into(), "y".into()],
        }
    }

    pub fn pdf(&self, x: &[f64]) -> CliResult<f64> {
        let want = self.coordinate_names().len();
        if x.len() != want {
            return Err(CliError::Usage(format!("point has {} coordinates, expected {want}", x.len())));
        }
        Ok(match self {
            AnyDistribution::Circular(d) => d.pdf(x[0])?,
            AnyDistribution::Torus(d) => d.pdf(x)?,
            AnyDistribution::Sphere(d) => d.pdf(x)?,
            AnyDistribution::Complex(d) => d.pdf(&to_complex(x))?,
            AnyDistribution::Se2(d) => d.pdf(x)?,
        })
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        match self {
            AnyDistribution::Circular(d) => d.sample(n, rng).into_iter().map(|a| vec![a.value()]).collect(),
            AnyDistribution::Torus(d) => d.sample(n, rng),
            AnyDistribution::Sphere(d) => d.sample(n, rng),
            AnyDistribution::Complex(d) => d
                .sample(n, rng)
                .into_iter()
                .map(|z| z.iter().flat_map(|c| [c.re, c.im]).collect())
                .collect(),
            AnyDistribution::Se2(d) => d.sample(n, rng),
        }
    }

    /// Regular evaluation grid with `n` points per periodic axis, or
    /// `None` when the manifold has no such grid.
    pub fn grid(&self, n: usize) -> Option<Vec<Vec<f64>>> {
        let axis: Vec<f64> = (0..n).map(|j| dirkit::TWO_PI * j as f64 / n as f64).collect();
        match self {
            AnyDistribution::Circular(_) => Some(axis.iter().map(|&x| vec![x]).collect()),
            AnyDistribution::Torus(d) => {
                let mut pts = vec![vec![]];
                for _ in 0..d.dim() {
                    pts = pts
                        .into_iter()
                        .flat_map(|p: Vec<f64>| {
                            axis.iter().map(move |&x| {
                                let mut q = p.clone();
                                q.push(x);
                                q
                            })
                        })
                        .collect();
                }
                Some(pts)
            }
            AnyDistribution::Sphere(d) if d.dim() == 2 => Some(axis.iter().map(|&t| vec![t.cos(), t.sin()]).collect()),
            _ => None,
        }
    }
}

pub fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}
