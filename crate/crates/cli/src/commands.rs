//! Thin wrappers over the library for the single-shot subcommands.

use std::path::Path;

use dirkit::circular::{CircularDistribution, WrappedDiracMixture};
use dirkit::complex::{ComplexACG, ComplexBingham, ComplexDistribution, ComplexWatson, ComplexWatsonMixture};
use dirkit::fourier::{FourierDensity, Transformation};
use dirkit::hypersphere::{BinghamDist, HypersphericalDistribution, VonMisesFisher};
use dirkit::hypertorus::{HypertoroidalDistribution, HypertoroidalFourier, HypertoroidalWD};
use dirkit::se2::{Se2Bingham, Se2Distribution, Se2Point};
use dirkit::Complex64;

use crate::dist::{to_complex, AnyDistribution};
use crate::error::{CliError, CliResult};
use crate::output::Table;

/// Reads a distribution from a file path, `-` for stdin, or inline JSON.
pub fn load_distribution(arg: &str) -> CliResult<AnyDistribution> {
    AnyDistribution::from_json(&read_arg(arg)?)
}

pub fn read_arg(arg: &str) -> CliResult<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return Ok(arg.to_string());
    }
    if arg == "-" {
        return Ok(std::io::read_to_string(std::io::stdin())?);
    }
    std::fs::read_to_string(arg).map_err(|e| CliError::Usage(format!("cannot read {arg}: {e}")))
}

pub fn pdf(d: &AnyDistribution, grid: usize, at: Option<&Path>) -> CliResult<Table> {
    let points = match at {
        Some(p) => read_points(p)?.0,
        None => d
            .grid(grid)
            .ok_or_else(|| CliError::Usage("this manifold has no default grid; pass --at with a point file".into()))?,
    };
    let mut header = d.coordinate_names();
    header.push("f".into());
    let rows = points
        .into_iter()
        .map(|mut p| {
            let f = d.pdf(&p)?;
            p.push(f);
            Ok(p)
        })
        .collect::<CliResult<_>>()?;
    Ok(Table { header, rows })
}

/// Trigonometric moment `E[exp(i k·x)]`.
pub fn moment(d: &AnyDistribution, k: &[i32], numerical: bool) -> CliResult<Complex64> {
    match d {
        AnyDistribution::Circular(c) => {
            if k.len() != 1 {
                return Err(CliError::Usage("circular moments take one integer k".into()));
            }
            Ok(if numerical {
                c.trigonometric_moment_numerical(k[0])
            } else {
                c.trigonometric_moment(k[0])
            })
        }
        AnyDistribution::Torus(t) => {
            if k.len() != t.dim() {
                return Err(CliError::Usage(format!("need {} comma-separated orders", t.dim())));
            }
            if numerical {
                let dens = t.density().ok_or(dirkit::Error::NoDensity)?;
                Ok(dens.trigonometric_moment_numerical(k))
            } else {
                Ok(t.trigonometric_moment(k)?)
            }
        }
        _ => Err(CliError::Usage("trigonometric moments exist for circular and toroidal distributions only".into())),
    }
}

/// Samples from a CSV file with a header row; an optional column named `w`
/// holds weights.
pub fn read_points(path: &Path) -> CliResult<(Vec<Vec<f64>>, Option<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let w_col = header.iter().position(|h| h.trim() == "w");
    let mut points = vec![];
    let mut weights = vec![];
    for rec in r.records() {
        let rec = rec?;
        let mut p = Vec::with_capacity(rec.len());
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("not a number: {field:?}")))?;
            if Some(i) == w_col {
                weights.push(v);
            } else {
                p.push(v);
            }
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(CliError::Usage("sample file has no rows".into()));
    }
    Ok((points, w_col.map(|_| weights)))
}

pub const FIT_FAMILIES: &[&str] = &[
    "wn",
    "vm",
    "hwn",
    "vmf",
    "bingham",
    "complex_bingham",
    "complex_watson",
    "complex_acg",
    "complex_watson_mixture",
    "se2_bingham",
];

pub struct FitOptions {
    pub components: usize,
    pub seed: u64,
    pub tol: f64,
}

pub fn fit(family: &str, path: &Path, opts: &FitOptions) -> CliResult<AnyDistribution> {
    let (points, weights) = read_points(path)?;
    let weights = weights.unwrap_or_else(|| vec![1.0; points.len()]);
    let complex = || points.iter().map(|p| to_complex(p)).collect::<Vec<_>>();
    Ok(match family {
        "wn" | "vm" => {
            let x: Vec<f64> = points.iter().map(|p| p[0]).collect();
            let wd = WrappedDiracMixture::new(x, weights)?;
            AnyDistribution::Circular(if family == "wn" {
                wd.to_wn()?.into()
            } else {
                wd.to_vm()?.into()
            })
        }
        "hwn" => AnyDistribution::Torus(HypertoroidalWD::new(points, weights)?.to_hwn()?.into()),
        "vmf" => AnyDistribution::Sphere(VonMisesFisher::fit(&points, &weights)?.into()),
        "bingham" => AnyDistribution::Sphere(BinghamDist::fit(&points, &weights)?.into()),
        "complex_bingham" => AnyDistribution::Complex(ComplexDistribution::Bingham(ComplexBingham::fit(&complex(), &weights)?)),
        "complex_watson" => AnyDistribution::Complex(ComplexDistribution::Watson(ComplexWatson::fit(&complex(), &weights)?)),
        "complex_acg" => AnyDistribution::Complex(ComplexDistribution::Acg(ComplexACG::fit(&complex(), &weights)?)),
        "complex_watson_mixture" => {
            let em = ComplexWatsonMixture::fit_em(&complex(), opts.components, opts.seed, 500, opts.tol)?;
            AnyDistribution::Complex(ComplexDistribution::WatsonMixture(em.mixture))
        }
        "se2_bingham" => {
            let pts = points
                .iter()
                .map(|p| {
                    if p.len() != 4 {
                        return Err(CliError::Usage("SE(2) samples need four columns c,s,x,y".into()));
                    }
                    Ok(Se2Point::new([p[0], p[1]], [p[2], p[3]])?)
                })
                .collect::<CliResult<Vec<_>>>()?;
            AnyDistribution::Se2(Se2Distribution::Bingham(Se2Bingham::fit(&pts, &weights)?))
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown family {other:?}; expected one of {}",
                FIT_FAMILIES.join(", ")
            )))
        }
    })
}

/// `dirac3`, `dirac5`, `fourier:n` or `fourier_sqrt:n`.
pub fn approx(d: &AnyDistribution, scheme: &str) -> CliResult<AnyDistribution> {
    let (name, n) = match scheme.split_once(':') {
        Some((a, b)) => (
            a,
            Some(b.parse::<usize>().map_err(|_| CliError::Usage(format!("bad coefficient count in {scheme:?}")))?),
        ),
        None => (scheme, None),
    };
    let transformation = match name {
        "fourier" => Some(Transformation::Identity),
        "fourier_sqrt" => Some(Transformation::Sqrt),
        _ => None,
    };
    let inadmissible = || CliError::Usage(format!("scheme {scheme:?} is not available for this distribution"));
    match (d, name, transformation) {
        (AnyDistribution::Circular(c), "dirac3", _) => Ok(AnyDistribution::Circular(c.to_dirac3()?.into())),
        (AnyDistribution::Circular(c), "dirac5", _) => Ok(AnyDistribution::Circular(c.to_dirac5()?.into())),
        (AnyDistribution::Circular(c), _, Some(t)) => {
            let dens = c.density().ok_or(dirkit::Error::NoDensity)?;
            let fd = FourierDensity::from_distribution(dens, n.unwrap_or(101), t)?;
            Ok(AnyDistribution::Circular(CircularDistribution::from(fd)))
        }
        (AnyDistribution::Torus(HypertoroidalDistribution::Hwn(h)), "dirac3" | "dirac5", _) => {
            let order = if name == "dirac3" { 3 } else { 5 };
            Ok(AnyDistribution::Torus(h.to_dirac_gauss_hermite(order)?.into()))
        }
        (AnyDistribution::Torus(t), _, Some(tr)) => {
            let dens = t.density().ok_or(dirkit::Error::NoDensity)?;
            let shape = vec![n.unwrap_or(101); t.dim()];
            Ok(AnyDistribution::Torus(HypertoroidalFourier::from_distribution(dens, shape, tr)?.into()))
        }
        (AnyDistribution::Sphere(HypersphericalDistribution::Vmf(v)), "dirac", _) => {
            Ok(AnyDistribution::Sphere(v.deterministic_sample()?.into()))
        }
        _ => Err(inadmissible()),
    }
}
