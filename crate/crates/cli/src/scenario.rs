//! Monte Carlo filter scenarios driven by a JSON config.

use std::time::Instant;

use dirkit::circular::{fit_vm_from_moment, fit_wn_from_moment, CircularDensity, CircularDistribution, PiecewiseConstant};
use dirkit::filters::{
    pwc_transition_from_noise, CircularParticleFilter, FourierFilter, GridFilter, HypertoroidalFourierFilter,
    HypertoroidalParticleFilter, PwcFilter, ToroidalWnFilter, VmFilter, VmfFilter, WnFilter,
};
use dirkit::fourier::Transformation;
use dirkit::hypersphere::{HypersphericalDensity, HypersphericalDistribution, VonMisesFisher};
use dirkit::hypertorus::{HypertoroidalDensity, HypertoroidalDistribution, HypertoroidalFourier, HypertoroidalWN};
use dirkit::numerics::wrap_f64;
use dirkit::{angular_distance, wrap, Complex64, TWO_PI};
use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dist::AnyDistribution;
use crate::error::{CliError, CliResult};
use crate::output::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Circle,
    Torus,
    Sphere,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// `identity` on every manifold, or `example5` on the circle for
    /// `a(x) = x + 0.5 cos²x`.
    pub model: String,
    pub noise: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSpec {
    /// `identity` on every manifold, or `sine` on the circle for
    /// `z = sin x + v` with Gaussian `v`.
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Coefficients per axis (Fourier) or particle count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Grid or interval count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transformation: Option<String>,
}

impl FilterSpec {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| match (&self.transformation, self.family.as_str()) {
            (Some(t), "fourier") => format!("fourier_{t}"),
            _ => self.family.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl MeasurementValue {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            MeasurementValue::Scalar(v) => vec![*v],
            MeasurementValue::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub manifold: Manifold,
    pub initial: Value,
    pub system: SystemSpec,
    pub measurement: MeasurementSpec,
    pub steps: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    /// Fixed measurement sequence (one per step) used instead of simulated
    /// measurements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurements: Option<Vec<MeasurementValue>>,
    pub filters: Vec<FilterSpec>,
}

fn default_runs() -> usize {
    1
}

impl ScenarioConfig {
    pub fn from_json(s: &str) -> CliResult<Self> {
        serde_json::from_str(s).map_err(|e| CliError::Usage(format!("invalid scenario config: {e}")))
    }

    /// SHA-256 of the canonical (key-sorted) JSON form.
    pub fn hash(&self) -> CliResult<String> {
        let v = serde_json::to_value(self)?;
        let digest = Sha256::digest(serde_json::to_vec(&v)?);
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Row {
    pub run: usize,
    pub step: usize,
    pub filter: String,
    pub truth: Vec<f64>,
    pub measurement: Vec<f64>,
    pub predicted_mean: Vec<f64>,
    pub mean: Vec<f64>,
    pub error: f64,
    /// Predicted and updated estimates for parametric filters.
    pub predicted: Option<Value>,
    pub estimate: Option<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub filter: String,
    pub mean_final_error: f64,
    pub median_final_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub filter: String,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub config_hash: String,
    pub runs: usize,
    pub steps: usize,
    pub filters: Vec<String>,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub metadata: Metadata,
    pub config: ScenarioConfig,
    pub summary: Vec<Summary>,
    pub timing: Vec<Timing>,
    pub rows: Vec<Row>,
}

impl RunReport {
    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let d = self.rows.first().map_or(1, |r| r.truth.len());
        let dz = self.rows.first().map_or(1, |r| r.measurement.len());
        let cols = |p: &str, n: usize| -> Vec<String> {
            if n == 1 {
                vec![p.to_string()]
            } else {
                (1..=n).map(|i| format!("{p}_{i}")).collect()
            }
        };
        let mut w = csv::Writer::from_writer(vec![]);
        let mut header = vec!["run".to_string(), "step".into(), "filter".into()];
        header.extend(cols("truth", d));
        header.extend(cols("measurement", dz));
        header.extend(cols("predicted_mean", d));
        header.extend(cols("mean", d));
        header.push("error".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.run.to_string(), r.step.to_string(), r.filter.clone()];
            for v in [&r.truth, &r.measurement, &r.predicted_mean, &r.mean] {
                rec.extend(v.iter().map(|&x| fmt_f64(x)));
            }
            rec.push(fmt_f64(r.error));
            w.write_record(&rec)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

fn parse_dist(v: &Value) -> CliResult<AnyDistribution> {
    AnyDistribution::from_json(&serde_json::to_string(v)?)
}

fn example5(x: f64) -> f64 {
    wrap_f64(x + 0.5 * x.cos().powi(2))
}

fn gaussian_pdf(r: f64, var: f64) -> f64 {
    (-0.5 * r * r / var).exp() / (TWO_PI * var).sqrt()
}

/// Resolved models of one scenario.
#[derive(Clone)]
enum Models {
    Circle {
        initial: CircularDistribution,
        nonlinear: bool,
        sys_noise: CircularDistribution,
        meas: CircleMeasurement,
    },
    Torus {
        initial: HypertoroidalDistribution,
        sys_noise: HypertoroidalDistribution,
        meas_noise: HypertoroidalDistribution,
    },
    Sphere {
        initial: VonMisesFisher,
        sys_noise: VonMisesFisher,
        meas_kappa: f64,
    },
}

#[derive(Clone)]
enum CircleMeasurement {
    Identity(CircularDistribution),
    Sine(f64),
}

impl CircleMeasurement {
    fn likelihood(&self, z: f64) -> impl Fn(f64) -> f64 + '_ {
        move |x| match self {
            CircleMeasurement::Identity(n) => n.pdf(z - x).unwrap_or(0.0),
            CircleMeasurement::Sine(var) => gaussian_pdf(z - x.sin(), *var),
        }
    }
}

fn resolve(cfg: &ScenarioConfig) -> CliResult<Models> {
    if cfg.steps == 0 {
        return Err(CliError::Usage("steps must be at least 1".into()));
    }
    if cfg.runs == 0 {
        return Err(CliError::Usage("runs must be at least 1".into()));
    }
    let mismatch = |what: &str| CliError::Usage(format!("{what} does not live on the {:?} manifold", cfg.manifold));
    let initial = parse_dist(&cfg.initial)?;
    let sys_noise = parse_dist(&cfg.system.noise)?;
    let meas_noise = cfg.measurement.noise.as_ref().map(parse_dist).transpose()?;
    let model = cfg.system.model.as_str();
    let meas_model = cfg.measurement.model.as_str();
    let models = match cfg.manifold {
        Manifold::Circle => {
            let (AnyDistribution::Circular(initial), AnyDistribution::Circular(sys_noise)) = (initial, sys_noise) else {
                return Err(mismatch("initial or system noise distribution"));
            };
            let nonlinear = match model {
                "identity" => false,
                "example5" => true,
                other => return Err(CliError::Usage(format!("unknown circular system model {other:?}"))),
            };
            let meas = match (meas_model, meas_noise, cfg.measurement.variance) {
                ("identity", Some(AnyDistribution::Circular(n)), _) => CircleMeasurement::Identity(n),
                ("identity", Some(_), _) => return Err(mismatch("measurement noise")),
                ("sine", _, Some(v)) if v > 0.0 => CircleMeasurement::Sine(v),
                ("identity", None, _) => return Err(CliError::Usage("identity measurement needs \"noise\"".into())),
                ("sine", _, _) => return Err(CliError::Usage("sine measurement needs a positive \"variance\"".into())),
                (other, _, _) => return Err(CliError::Usage(format!("unknown circular measurement model {other:?}"))),
            };
            Models::Circle {
                initial,
                nonlinear,
                sys_noise,
                meas,
            }
        }
        Manifold::Torus => {
            if model != "identity" || meas_model != "identity" {
                return Err(CliError::Usage("toroidal scenarios support identity models only".into()));
            }
            let (AnyDistribution::Torus(initial), AnyDistribution::Torus(sys_noise), Some(AnyDistribution::Torus(meas_noise))) =
                (initial, sys_noise, meas_noise)
            else {
                return Err(mismatch("initial, system noise or measurement noise distribution"));
            };
            if sys_noise.dim() != initial.dim() || meas_noise.dim() != initial.dim() {
                return Err(CliError::Usage("noise dimensions differ from the state dimension".into()));
            }
            Models::Torus {
                initial,
                sys_noise,
                meas_noise,
            }
        }
        Manifold::Sphere => {
            if model != "identity" || meas_model != "identity" {
                return Err(CliError::Usage("spherical scenarios support identity models only".into()));
            }
            let vmf = |d: AnyDistribution| match d {
                AnyDistribution::Sphere(HypersphericalDistribution::Vmf(v)) => Ok(v),
                _ => Err(CliError::Usage("spherical scenarios need von Mises-Fisher distributions".into())),
            };
            let initial = vmf(initial)?;
            let sys_noise = vmf(sys_noise)?;
            let meas = vmf(meas_noise.ok_or_else(|| CliError::Usage("identity measurement needs \"noise\"".into()))?)?;
            if sys_noise.mu().len() != initial.mu().len() || meas.mu().len() != initial.mu().len() {
                return Err(CliError::Usage("noise dimensions differ from the state dimension".into()));
            }
            Models::Sphere {
                initial,
                sys_noise,
                meas_kappa: meas.kappa(),
            }
        }
    };
    if let Some(m) = &cfg.measurements {
        if m.len() != cfg.steps {
            return Err(CliError::Usage(format!("{} measurements given for {} steps", m.len(), cfg.steps)));
        }
    }
    Ok(models)
}

/// One filter instance inside a run.
trait ScenarioFilter {
    fn predict(&mut self, rng: &mut dyn RngCore) -> CliResult<()>;
    fn update(&mut self, z: &[f64], rng: &mut dyn RngCore) -> CliResult<()>;
    fn mean(&self) -> CliResult<Vec<f64>>;
    fn snapshot(&self) -> CliResult<Option<Value>> {
        Ok(None)
    }
}

/// Owned density view of a circular distribution known to have one.
#[derive(Debug)]
struct Dens(CircularDistribution);

impl CircularDensity for Dens {
    fn pdf(&self, x: f64) -> f64 {
        self.0.density().expect("checked").pdf(x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.density().expect("checked").breakpoints()
    }
    fn trigonometric_moment(&self, k: i32) -> Complex64 {
        self.0.trigonometric_moment(k)
    }
    fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Vec<dirkit::Angle> {
        self.0.sample(n, rng)
    }
}

fn density(d: &CircularDistribution, what: &str) -> CliResult<std::sync::Arc<dyn CircularDensity>> {
    d.density()
        .ok_or_else(|| CliError::Usage(format!("{what} needs a distribution with a density")))?;
    Ok(std::sync::Arc::new(Dens(d.clone())))
}

fn to_value(json: String) -> CliResult<Option<Value>> {
    Ok(Some(serde_json::from_str(&json)?))
}

fn transformation(spec: &FilterSpec) -> CliResult<Transformation> {
    match spec.transformation.as_deref() {
        None | Some("identity") => Ok(Transformation::Identity),
        Some("sqrt") => Ok(Transformation::Sqrt),
        Some(other) => Err(CliError::Usage(format!("unknown transformation {other:?}"))),
    }
}

struct CircleCtx {
    nonlinear: bool,
    sys_noise: CircularDistribution,
    meas: CircleMeasurement,
}

impl CircleCtx {
    fn a(&self) -> fn(f64) -> f64 {
        if self.nonlinear {
            example5
        } else {
            |x| x
        }
    }
}

struct WnRun {
    f: WnFilter,
    ctx: std::sync::Arc<CircleCtx>,
    noise: dirkit::circular::WrappedNormal,
    meas_noise: Option<dirkit::circular::WrappedNormal>,
}

impl ScenarioFilter for WnRun {
    fn predict(&mut self, _: &mut dyn RngCore) -> CliResult<()> {
        if self.ctx.nonlinear {
            self.f.predict_nonlinear(&example5, &self.noise)?;
        } else {
            self.f.predict_identity(&self.noise)?;
        }
        Ok(())
    }
    fn update(&mut self, z: &[f64], _: &mut dyn RngCore) -> CliResult<()> {
        match &self.meas_noise {
            Some(n) => self.f.update_identity(z[0], n)?,
            None => {
                self.f.update_nonlinear_progressive(&self.ctx.meas.likelihood(z[0]))?;
            }
        }
        Ok(())
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        Ok(vec![self.f.estimate().mu().value()])
    }
    fn snapshot(&self) -> CliResult<Option<Value>> {
        to_value(CircularDistribution::from(self.f.estimate().clone()).to_json()?)
    }
}

struct VmRun {
    f: VmFilter,
    ctx: std::sync::Arc<CircleCtx>,
    noise: dirkit::circular::VonMises,
    meas_noise: Option<dirkit::circular::VonMises>,
}

impl ScenarioFilter for VmRun {
    fn predict(&mut self, _: &mut dyn RngCore) -> CliResult<()> {
        if self.ctx.nonlinear {
            self.f.predict_nonlinear(&example5, &self.noise)?;
        } else {
            self.f.predict_identity(&self.noise)?;
        }
        Ok(())
    }
    fn update(&mut self, z: &[f64], _: &mut dyn RngCore) -> CliResult<()> {
        match &self.meas_noise {
            Some(n) => self.f.update_identity(z[0], n)?,
            None => {
                self.f.update_nonlinear_progressive(&self.ctx.meas.likelihood(z[0]))?;
            }
        }
        Ok(())
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        Ok(vec![self.f.estimate().mu().value()])
    }
    fn snapshot(&self) -> CliResult<Option<Value>> {
        to_value(CircularDistribution::from(self.f.estimate().clone()).to_json()?)
    }
}

fn circular_mean_of(m: Complex64) -> CliResult<Vec<f64>> {
    Ok(vec![dirkit::circular::mean_from_moment(m)?.value()])
}

struct FourierRun {
    f: FourierFilter,
    ctx: std::sync::Arc<CircleCtx>,
    noise: std::sync::Arc<dyn CircularDensity>,
    transition: Option<HypertoroidalFourier>,
}

impl ScenarioFilter for FourierRun {
    fn predict(&mut self, _: &mut dyn RngCore) -> CliResult<()> {
        match &self.transition {
            Some(t) => self.f.predict_transition(t)?,
            None => self.f.predict_identity(self.noise.as_ref())?,
        }
        Ok(())
    }
    fn update(&mut self, z: &[f64], _: &mut dyn RngCore) -> CliResult<()> {
        self.f.update(&self.ctx.meas.likelihood(z[0]))?;
        Ok(())
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        circular_mean_of(self.f.estimate().trigonometric_moment(1))
    }
}

struct GridRun {
    f: GridFilter,
    ctx: std::sync::Arc<CircleCtx>,
    noise: std::sync::Arc<dyn CircularDensity>,
}

impl ScenarioFilter for GridRun {
    fn predict(&mut self, _: &mut dyn RngCore) -> CliResult<()> {
        if self.ctx.nonlinear {
            let noise = self.noise.clone();
            self.f.predict_transition(&move |xn, xp| noise.pdf(xn - example5(xp)))?;
        } else {
            self.f.predict_identity(self.noise.as_ref())?;
        }
        Ok(())
    }
    fn update(&mut self, z: &[f64], _: &mut dyn RngCore) -> CliResult<()> {
        self.f.update(&self.ctx.meas.likelihood(z[0]))?;
        Ok(())
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        Ok(vec![self.f.circular_mean()?.value()])
    }
}

struct PwcRun {
    f: PwcFilter,
    ctx: std::sync::Arc<CircleCtx>,
    t: std::sync::Arc<DMatrix<f64>>,
}

impl ScenarioFilter for PwcRun {
    fn predict(&mut self, _: &mut dyn RngCore) -> CliResult<()> {
        self.f.predict(&self.t)?;
        Ok(())
    }
    fn update(&mut self, z: &[f64], _: &mut dyn RngCore) -> CliResult<()> {
        self.f.update(&self.ctx.meas.likelihood(z[0]))?;
        Ok(())
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        circular_mean_of(self.f.estimate().trigonometric_moment(1))
    }
}

struct ParticleRun {
    f: CircularParticleFilter,
    ctx: std::sync::Arc<CircleCtx>,
    noise: std::sync::Arc<dyn CircularDensity>,
}

impl ScenarioFilter for ParticleRun {
    fn predict(&mut self, rng: &mut dyn RngCore) -> CliResult<()> {
        self.f.predict(&self.ctx.a(), Some(self.noise.as_ref()), rng)?;
        Ok(())
    }
    fn update(&mut self, z: &[f64], rng: &mut dyn RngCore) -> CliResult<()> {
        self.f.update(&self.ctx.meas.likelihood(z[0]), rng)?;
        Ok(())
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        Ok(vec![self.f.estimate()?.circular_mean()?.value()])
    }
}

fn pwc_transition(ctx: &CircleCtx, noise: &dyn CircularDensity, l: usize) -> CliResult<DMatrix<f64>> {
    if !ctx.nonlinear {
        return Ok(pwc_transition_from_noise(noise, l)?);
    }
    let h = TWO_PI / l as f64;
    let c: Vec<f64> = (0..l).map(|i| (i as f64 + 0.5) * h).collect();
    let mut t = DMatrix::from_fn(l, l, |i, j| noise.pdf(c[i] - example5(c[j])));
    for mut col in t.column_iter_mut() {
        let s: f64 = col.sum();
        if !(s > 0.0) {
            return Err(CliError::Usage("transition column without mass; refine the grid".into()));
        }
        col /= s;
    }
    Ok(t)
}

/// Per-scenario state shared by the runs: resolved models and any
/// precomputed transition operators.
struct Prepared {
    models: Models,
    circle: Option<std::sync::Arc<CircleCtx>>,
    pwc: Vec<Option<std::sync::Arc<DMatrix<f64>>>>,
    fourier: Vec<Option<HypertoroidalFourier>>,
}

const CIRCLE_FAMILIES: &[&str] = &["wn", "vm", "fourier", "grid", "pwc", "particle"];
const TORUS_FAMILIES: &[&str] = &["twn", "fourier", "particle"];
const SPHERE_FAMILIES: &[&str] = &["vmf"];

fn prepare(cfg: &ScenarioConfig) -> CliResult<Prepared> {
    let models = resolve(cfg)?;
    let allowed = match cfg.manifold {
        Manifold::Circle => CIRCLE_FAMILIES,
        Manifold::Torus => TORUS_FAMILIES,
        Manifold::Sphere => SPHERE_FAMILIES,
    };
    if cfg.filters.is_empty() {
        return Err(CliError::Usage("no filters configured".into()));
    }
    let mut labels: Vec<String> = vec![];
    for f in &cfg.filters {
        if !allowed.contains(&f.family.as_str()) {
            return Err(CliError::Usage(format!(
                "filter family {:?} is not available on the {:?} manifold (expected one of {})",
                f.family,
                cfg.manifold,
                allowed.join(", ")
            )));
        }
        if labels.contains(&f.label()) {
            return Err(CliError::Usage(format!("duplicate filter name {:?}", f.label())));
        }
        labels.push(f.label());
    }
    let circle = match &models {
        Models::Circle {
            nonlinear,
            sys_noise,
            meas,
            ..
        } => Some(std::sync::Arc::new(CircleCtx {
            nonlinear: *nonlinear,
            sys_noise: sys_noise.clone(),
            meas: meas.clone(),
        })),
        _ => None,
    };
    let mut pwc = vec![];
    let mut fourier = vec![];
    for f in &cfg.filters {
        let (mut p, mut t) = (None, None);
        if let Some(ctx) = &circle {
            match f.family.as_str() {
                "pwc" => {
                    let noise = density(&ctx.sys_noise, "the pwc filter")?;
                    p = Some(std::sync::Arc::new(pwc_transition(ctx, noise.as_ref(), f.l.unwrap_or(100))?));
                }
                "fourier" if ctx.nonlinear => {
                    let noise = density(&ctx.sys_noise, "the Fourier filter")?;
                    let n = f.n.unwrap_or(101);
                    t = Some(HypertoroidalFourier::from_function(
                        |x| noise.pdf(x[0] - example5(x[1])),
                        vec![n, n],
                        Transformation::Identity,
                    )?);
                }
                _ => {}
            }
        }
        pwc.push(p);
        fourier.push(t);
    }
    let prepared = Prepared {
        models,
        circle,
        pwc,
        fourier,
    };
    // construct every filter once so that configuration errors surface
    // before any run starts
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for i in 0..cfg.filters.len() {
        build_filter(cfg, &prepared, i, &mut rng, true)?;
    }
    Ok(prepared)
}

fn build_filter(
    cfg: &ScenarioConfig,
    p: &Prepared,
    i: usize,
    rng: &mut dyn RngCore,
    dry: bool,
) -> CliResult<Box<dyn ScenarioFilter>> {
    let spec = &cfg.filters[i];
    let n_particles = if dry { 1 } else { spec.n.unwrap_or(1000) };
    Ok(match &p.models {
        Models::Circle { initial, .. } => {
            let ctx = p.circle.clone().expect("circle context");
            let meas_noise = match &ctx.meas {
                CircleMeasurement::Identity(n) => Some(n.clone()),
                CircleMeasurement::Sine(_) => None,
            };
            match spec.family.as_str() {
                "wn" => {
                    let init = match initial {
                        CircularDistribution::Wn(w) => w.clone(),
                        other => fit_wn_from_moment(other.trigonometric_moment(1))?,
                    };
                    let as_wn = |d: &CircularDistribution| -> CliResult<_> {
                        Ok(match d {
                            CircularDistribution::Wn(w) => w.clone(),
                            other => fit_wn_from_moment(other.trigonometric_moment(1))?,
                        })
                    };
                    Box::new(WnRun {
                        f: WnFilter::new(init),
                        noise: as_wn(&ctx.sys_noise)?,
                        meas_noise: meas_noise.as_ref().map(as_wn).transpose()?,
                        ctx,
                    })
                }
                "vm" => {
                    let as_vm = |d: &CircularDistribution| -> CliResult<_> {
                        Ok(match d {
                            CircularDistribution::Vm(v) => v.clone(),
                            other => fit_vm_from_moment(other.trigonometric_moment(1))?,
                        })
                    };
                    Box::new(VmRun {
                        f: VmFilter::new(as_vm(initial)?),
                        noise: as_vm(&ctx.sys_noise)?,
                        meas_noise: meas_noise.as_ref().map(as_vm).transpose()?,
                        ctx,
                    })
                }
                "fourier" => {
                    let init = density(initial, "the Fourier filter")?;
                    Box::new(FourierRun {
                        f: FourierFilter::from_density(init.as_ref(), spec.n.unwrap_or(101), transformation(spec)?)?,
                        noise: density(&ctx.sys_noise, "the Fourier filter")?,
                        transition: p.fourier[i].clone(),
                        ctx,
                    })
                }
                "grid" => {
                    let init = density(initial, "the grid filter")?;
                    Box::new(GridRun {
                        f: GridFilter::from_density(init.as_ref(), spec.l.unwrap_or(100))?,
                        noise: density(&ctx.sys_noise, "the grid filter")?,
                        ctx,
                    })
                }
                "pwc" => {
                    let init = density(initial, "the pwc filter")?;
                    Box::new(PwcRun {
                        f: PwcFilter::new(PiecewiseConstant::from_density(init.as_ref(), spec.l.unwrap_or(100))?),
                        t: p.pwc[i].clone().expect("precomputed transition"),
                        ctx,
                    })
                }
                "particle" => {
                    if n_particles == 0 {
                        return Err(CliError::Usage("particle count must be positive".into()));
                    }
                    let f = CircularParticleFilter::from_particles(
                        initial.sample(n_particles, rng).into_iter().map(|a| a.value()).collect(),
                    )?;
                    Box::new(ParticleRun {
                        f,
                        noise: density(&ctx.sys_noise, "the particle filter")?,
                        ctx,
                    })
                }
                other => unreachable!("family {other} validated"),
            }
        }
        Models::Torus {
            initial,
            sys_noise,
            meas_noise,
        } => {
            let need_density = |d: &HypertoroidalDistribution| {
                d.density()
                    .map(|_| ())
                    .ok_or_else(|| CliError::Usage(format!("{} filter needs densities", spec.family)))
            };
            match spec.family.as_str() {
                "twn" => {
                    let as_hwn = |d: &HypertoroidalDistribution| -> CliResult<HypertoroidalWN> {
                        Ok(match d {
                            HypertoroidalDistribution::Hwn(h) => h.clone(),
                            other => HypertoroidalWN::from_moments(other.dim(), |k| {
                                other.trigonometric_moment(k).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
                            })?,
                        })
                    };
                    Box::new(TwnRun {
                        f: ToroidalWnFilter::new(as_hwn(initial)?),
                        sys: as_hwn(sys_noise)?,
                        meas: as_hwn(meas_noise)?,
                    })
                }
                "fourier" => {
                    need_density(initial)?;
                    need_density(sys_noise)?;
                    need_density(meas_noise)?;
                    let shape = vec![spec.n.unwrap_or(21); initial.dim()];
                    Box::new(HtFourierRun {
                        f: HypertoroidalFourierFilter::from_density(
                            initial.density().expect("checked"),
                            shape,
                            transformation(spec)?,
                        )?,
                        sys: sys_noise.clone(),
                        meas: meas_noise.clone(),
                    })
                }
                "particle" => {
                    need_density(sys_noise)?;
                    need_density(meas_noise)?;
                    let particles = initial.sample(n_particles, rng);
                    Box::new(HtParticleRun {
                        f: HypertoroidalParticleFilter::from_particles(particles)?,
                        sys: sys_noise.clone(),
                        meas: meas_noise.clone(),
                    })
                }
                other => unreachable!("family {other} validated"),
            }
        }
        Models::Sphere {
            initial,
            sys_noise,
            meas_kappa,
        } => Box::new(VmfRun {
            f: VmfFilter::new(initial.clone()),
            sys: sys_noise.clone(),
            kappa: *meas_kappa,
        }),
    })
}

struct TwnRun {
    f: ToroidalWnFilter,
    sys: HypertoroidalWN,
    meas: HypertoroidalWN,
}

impl ScenarioFilter for TwnRun {
    fn predict(&mut self, _: &mut dyn RngCore) -> CliResult<()> {
        Ok(self.f.predict_identity(&self.sys)?)
    }
    fn update(&mut self, z: &[f64], _: &mut dyn RngCore) -> CliResult<()> {
        Ok(self.f.update_identity(z, &self.meas)?)
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        Ok(self.f.estimate().mu().iter().map(|a| a.value()).collect())
    }
    fn snapshot(&self) -> CliResult<Option<Value>> {
        to_value(HypertoroidalDistribution::from(self.f.estimate().clone()).to_json()?)
    }
}

struct HtFourierRun {
    f: HypertoroidalFourierFilter,
    sys: HypertoroidalDistribution,
    meas: HypertoroidalDistribution,
}

impl ScenarioFilter for HtFourierRun {
    fn predict(&mut self, _: &mut dyn RngCore) -> CliResult<()> {
        Ok(self.f.predict_identity(self.sys.density().expect("checked"))?)
    }
    fn update(&mut self, z: &[f64], _: &mut dyn RngCore) -> CliResult<()> {
        Ok(self.f.update_identity(z, self.meas.density().expect("checked"))?)
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        Ok(self.f.estimate().circular_means()?.iter().map(|a| a.value()).collect())
    }
}

struct HtParticleRun {
    f: HypertoroidalParticleFilter,
    sys: HypertoroidalDistribution,
    meas: HypertoroidalDistribution,
}

impl ScenarioFilter for HtParticleRun {
    fn predict(&mut self, rng: &mut dyn RngCore) -> CliResult<()> {
        Ok(self.f.predict_identity(self.sys.density().expect("checked"), rng)?)
    }
    fn update(&mut self, z: &[f64], rng: &mut dyn RngCore) -> CliResult<()> {
        let meas = self.meas.density().expect("checked");
        Ok(self.f.update(
            &|x: &[f64]| {
                let r: Vec<f64> = z.iter().zip(x).map(|(z, x)| z - x).collect();
                meas.pdf(&r)
            },
            rng,
        )?)
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        let est = self.f.estimate()?;
        let d = est.dim();
        (0..d)
            .map(|i| {
                let mut k = vec![0; d];
                k[i] = 1;
                Ok(dirkit::circular::mean_from_moment(est.trigonometric_moment(&k))?.value())
            })
            .collect()
    }
}

struct VmfRun {
    f: VmfFilter,
    sys: VonMisesFisher,
    kappa: f64,
}

impl ScenarioFilter for VmfRun {
    fn predict(&mut self, _: &mut dyn RngCore) -> CliResult<()> {
        Ok(self.f.predict_identity(&self.sys)?)
    }
    fn update(&mut self, z: &[f64], _: &mut dyn RngCore) -> CliResult<()> {
        Ok(self.f.update_identity(z, self.kappa)?)
    }
    fn mean(&self) -> CliResult<Vec<f64>> {
        Ok(self.f.estimate().mu().iter().copied().collect())
    }
    fn snapshot(&self) -> CliResult<Option<Value>> {
        to_value(HypersphericalDistribution::from(self.f.estimate().clone()).to_json()?)
    }
}

/// Ground-truth states and measurements of one run.
fn simulate(cfg: &ScenarioConfig, models: &Models, rng: &mut dyn RngCore) -> CliResult<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut out = Vec::with_capacity(cfg.steps);
    match models {
        Models::Circle {
            initial,
            nonlinear,
            sys_noise,
            meas,
        } => {
            let mut x = initial.sample(1, rng)[0].value();
            for _ in 0..cfg.steps {
                let a = if *nonlinear { example5(x) } else { x };
                x = wrap_f64(a + sys_noise.sample(1, rng)[0].value());
                let z = match meas {
                    CircleMeasurement::Identity(n) => wrap_f64(x + n.sample(1, rng)[0].value()),
                    CircleMeasurement::Sine(var) => x.sin() + var.sqrt() * Distribution::<f64>::sample(&StandardNormal, rng),
                };
                out.push((vec![x], vec![z]));
            }
        }
        Models::Torus {
            initial,
            sys_noise,
            meas_noise,
        } => {
            let mut x = initial.sample(1, rng).remove(0);
            for _ in 0..cfg.steps {
                let w = sys_noise.sample(1, rng).remove(0);
                x = x.iter().zip(&w).map(|(x, w)| wrap_f64(x + w)).collect();
                let v = meas_noise.sample(1, rng).remove(0);
                let z = x.iter().zip(&v).map(|(x, v)| wrap_f64(x + v)).collect();
                out.push((x.clone(), z));
            }
        }
        Models::Sphere {
            initial,
            sys_noise,
            meas_kappa,
        } => {
            let mut x = initial.sample(1, rng).remove(0);
            for _ in 0..cfg.steps {
                x = VonMisesFisher::new(&x, sys_noise.kappa())?.sample(1, rng).remove(0);
                let z = VonMisesFisher::new(&x, *meas_kappa)?.sample(1, rng).remove(0);
                out.push((x.clone(), z));
            }
        }
    }
    if let Some(fixed) = &cfg.measurements {
        for (o, z) in out.iter_mut().zip(fixed) {
            o.1 = z.to_vec();
        }
    }
    Ok(out)
}

fn error(manifold: Manifold, est: &[f64], truth: &[f64]) -> CliResult<f64> {
    Ok(match manifold {
        Manifold::Circle | Manifold::Torus => est
            .iter()
            .zip(truth)
            .map(|(&a, &b)| Ok(angular_distance(wrap(a)?, wrap(b)?).powi(2)))
            .sum::<CliResult<f64>>()?
            .sqrt(),
        Manifold::Sphere => {
            let (a, b) = (DVector::from_column_slice(est), DVector::from_column_slice(truth));
            (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
        }
    })
}

/// Per-run generator for stream `stream`: seeded with `seed + run`.
pub fn run_rng(seed: u64, run: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(run as u64));
    rng.set_stream(stream);
    rng
}

fn run_one(cfg: &ScenarioConfig, p: &Prepared, run: usize) -> CliResult<(Vec<Row>, Vec<f64>)> {
    let mut truth_rng = run_rng(cfg.seed, run, 0);
    let truth = simulate(cfg, &p.models, &mut truth_rng)?;
    let mut rows = Vec::with_capacity(cfg.steps * cfg.filters.len());
    let mut times = vec![0.0; cfg.filters.len()];
    for (i, spec) in cfg.filters.iter().enumerate() {
        let mut rng = run_rng(cfg.seed, run, i as u64 + 1);
        let start = Instant::now();
        let mut f = build_filter(cfg, p, i, &mut rng, false)?;
        for (step, (x, z)) in truth.iter().enumerate() {
            f.predict(&mut rng)?;
            let predicted_mean = f.mean()?;
            let predicted = f.snapshot()?;
            f.update(z, &mut rng)?;
            let mean = f.mean()?;
            rows.push(Row {
                run,
                step: step + 1,
                filter: spec.label(),
                truth: x.clone(),
                measurement: z.clone(),
                error: error(cfg.manifold, &mean, x)?,
                predicted_mean,
                mean,
                predicted,
                estimate: f.snapshot()?,
            });
        }
        times[i] = start.elapsed().as_secs_f64();
    }
    Ok((rows, times))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs every Monte Carlo run in parallel (at most `threads` workers when
/// given) and assembles the report in run order.
pub fn run(cfg: &ScenarioConfig, threads: Option<usize>) -> CliResult<RunReport> {
    let prepared = prepare(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let results: Vec<(Vec<Row>, Vec<f64>)> =
        pool.install(|| (0..cfg.runs).into_par_iter().map(|r| run_one(cfg, &prepared, r)).collect::<CliResult<_>>())?;
    let labels: Vec<String> = cfg.filters.iter().map(|f| f.label()).collect();
    let mut timing: Vec<Timing> = labels
        .iter()
        .map(|l| Timing {
            filter: l.clone(),
            runtime_s: 0.0,
        })
        .collect();
    let mut rows = vec![];
    for (r, t) in results {
        rows.extend(r);
        for (acc, t) in timing.iter_mut().zip(t) {
            acc.runtime_s += t;
        }
    }
    let summary = labels
        .iter()
        .map(|l| {
            let finals: Vec<f64> = rows
                .iter()
                .filter(|r| &r.filter == l && r.step == cfg.steps)
                .map(|r| r.error)
                .collect();
            Summary {
                filter: l.clone(),
                mean_final_error: finals.iter().sum::<f64>() / finals.len() as f64,
                median_final_error: median(finals),
            }
        })
        .collect();
    Ok(RunReport {
        metadata: Metadata {
            seed: cfg.seed,
            config_hash: cfg.hash()?,
            runs: cfg.runs,
            steps: cfg.steps,
            filters: labels,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        config: cfg.clone(),
        summary,
        timing,
        rows,
    })
}
