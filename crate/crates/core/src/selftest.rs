//! Fast built-in regression checks: the reference examples at full
//! tolerance plus reduced versions of the property suites.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circular::{CircularDensity, CircularDistribution, VonMises, WrappedCauchy, WrappedNormal};
use crate::complex::{cb_log_norm, cb_to_real, uniform_complex, ComplexBingham, ComplexSphericalDensity, ComplexWatson, ComplexWatsonMixture};
use crate::filters::{CircularParticleFilter, FourierFilter, GridFilter, PwcFilter, WnFilter, pwc_transition_from_noise};
use crate::fourier::Transformation;
use crate::hypersphere::{BinghamDist, HypersphericalDensity, VonMisesFisher};
use crate::hypertorus::{HypertoroidalDensity, HypertoroidalWN, ToroidalVMMatrix};
use crate::numerics::{integrate, integrate_box, TWO_PI};
use crate::se2::{Se2Bingham, Se2PartiallyWrappedNormal, Se2Point};
use crate::{Complex64, Result};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = fn() -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("wn-moment", wn_moment),
    ("dirac-sampling", dirac_sampling),
    ("toroidal-wn", toroidal_wn),
    ("example-filter", example_filter),
    ("normalization", normalization),
    ("analytic-numeric", analytic_numeric),
    ("closures", closures),
    ("complex-sphere", complex_sphere),
    ("filters-vs-bayes", filters_vs_bayes),
    ("se2", se2),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Runs every check in order. A check that errors counts as failed.
pub fn run() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let (passed, detail) = match f() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                name: name.to_string(),
                passed,
                detail,
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn wn_moment() -> Result<(bool, String)> {
    let wn = WrappedNormal::new(2.0, 1.3)?;
    let want = Complex64::new(-0.1788, 0.3906);
    let a = wn.trigonometric_moment(1);
    let n = wn.trigonometric_moment_numerical(1);
    let ok = |m: Complex64| (m.re - want.re).abs() <= 5e-5 && (m.im - want.im).abs() <= 5e-5;
    Ok((ok(a) && ok(n), format!("analytic {a:.4}, numeric {n:.4}")))
}

fn sorted_pairs(pos: impl Iterator<Item = f64>, w: &[f64]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = pos.zip(w.iter().copied()).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn dirac_sampling() -> Result<(bool, String)> {
    let wn = WrappedNormal::new(2.0, 1.3)?;
    let d3 = wn.to_dirac3()?;
    let d5 = wn.to_dirac5()?;
    let t = 1.0 / 3.0;
    let near = |got: &[(f64, f64)], want: &[(f64, f64)]| {
        got.len() == want.len()
            && got.iter().zip(want).all(|(g, w)| (g.0 - w.0).abs() <= 5e-5 && (g.1 - w.1).abs() <= 5e-5)
    };
    let ok3 = near(
        &sorted_pairs(d3.positions().iter().map(|p| p.value()), d3.weights()),
        &[(0.5740, t), (2.0, t), (3.4260, t)],
    );
    let ok5 = near(
        &sorted_pairs(d5.positions().iter().map(|p| p.value()), d5.weights()),
        &[(0.1113, 0.1855), (1.3156, 0.1855), (2.0, 0.2581), (2.6844, 0.1855), (3.8887, 0.1855)],
    );
    let m1 = wn.trigonometric_moment(1);
    let err = (d3.trigonometric_moment(1) - m1)
        .norm()
        .max((d5.trigonometric_moment(1) - m1).norm())
        .max((d5.trigonometric_moment(2).norm() - wn.trigonometric_moment(2).norm()).abs());
    Ok((ok3 && ok5 && err <= 1e-9, format!("dirac3 {ok3}, dirac5 {ok5}, moment error {err:.1e}")))
}

fn toroidal_wn() -> Result<(bool, String)> {
    let t = HypertoroidalWN::new(vec![1.0, 3.0], DMatrix::from_row_slice(2, 2, &[1.0, -0.8, -0.8, 0.9]))?;
    let r1 = t.correlation_jammalamadaka()?;
    let r2 = t.correlation_johnson()?;
    let r3 = t.correlation_jupp()?;
    let marg_ok = match (t.marginalize_to_1d(0)?, t.marginalize_to_1d(1)?) {
        (CircularDistribution::Wn(a), CircularDistribution::Wn(b)) => {
            (a.mu().value() - 1.0).abs() <= 1e-4
                && (a.sigma() - 1.0).abs() <= 1e-4
                && (b.mu().value() - 3.0).abs() <= 1e-4
                && (b.sigma() - 0.9487).abs() <= 1e-4
        }
        _ => false,
    };
    let ok = (r1 + 0.8086).abs() <= 2e-3 && (r2 + 0.8086).abs() <= 2e-3 && (r3 + 1.0667).abs() <= 2e-3 && marg_ok;
    Ok((ok, format!("r1 {r1:.4}, r2 {r2:.4}, r3 {r3:.4}, marginals {marg_ok}")))
}

fn example_filter() -> Result<(bool, String)> {
    let mut f = WnFilter::new(WrappedNormal::new(2.0, 0.5)?);
    f.predict_nonlinear(&|x: f64| (x + 0.5 * x.cos().powi(2)).rem_euclid(TWO_PI), &WrappedNormal::new(0.0, 0.4)?)?;
    let p = f.estimate().clone();
    f.update_nonlinear_progressive(&|x: f64| {
        let r = 0.3 - x.sin();
        (-0.5 * r * r / 0.7).exp() / (TWO_PI * 0.7).sqrt()
    })?;
    let u = f.estimate();
    let ok = (p.mu().value() - 2.1289).abs() <= 1e-3
        && (p.sigma() - 0.7377).abs() <= 1e-3
        && (u.mu().value() - 2.1481).abs() <= 2e-2
        && (u.sigma() - 0.7427).abs() <= 2e-2;
    Ok((
        ok,
        format!(
            "predicted WN({:.4}, {:.4}), updated WN({:.4}, {:.4})",
            p.mu().value(),
            p.sigma(),
            u.mu().value(),
            u.sigma()
        ),
    ))
}

fn random_spd(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(d, d) * 0.2
}

fn normalization() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let mu = rng.random_range(0.0..TWO_PI);
        let circ: [Box<dyn CircularDensity>; 3] = [
            Box::new(WrappedNormal::new(mu, rng.random_range(0.1..2.0))?),
            Box::new(VonMises::new(mu, rng.random_range(0.0..20.0))?),
            Box::new(WrappedCauchy::new(mu, rng.random_range(0.1..2.0))?),
        ];
        for d in &circ {
            worst = worst.max((d.integral()? - 1.0).abs());
        }
        let t = HypertoroidalWN::new(vec![mu, 1.0], random_spd(2, &mut rng))?;
        worst = worst.max((t.integral()? - 1.0).abs());
        let v = VonMisesFisher::new(&[1.0, 0.0, 0.0], rng.random_range(0.0..10.0))?;
        worst = worst.max((v.integral()? - 1.0).abs());
    }
    // complex Watson on ℂS² by Monte Carlo, tolerance four standard errors
    let w = ComplexWatson::new(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)], 3.0)?;
    let area = 2.0 * std::f64::consts::PI.powi(3) / 2.0;
    let n = 20_000;
    let vals: Vec<f64> = (0..n).map(|_| area * w.pdf(uniform_complex(3, &mut rng).as_slice())).collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let se = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n * (n - 1)) as f64).sqrt();
    let ok = worst <= 1e-6 && (mean - 1.0).abs() <= 4.0 * se;
    Ok((ok, format!("worst deterministic error {worst:.1e}, Monte Carlo {:.2} SE", (mean - 1.0).abs() / se)))
}

fn analytic_numeric() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let wn = WrappedNormal::new(rng.random_range(0.0..TWO_PI), rng.random_range(0.1..2.0))?;
        let vm = VonMises::new(rng.random_range(0.0..TWO_PI), rng.random_range(0.0..20.0))?;
        for k in 1..=2 {
            for d in [&wn as &dyn CircularDensity, &vm] {
                let a = d.trigonometric_moment(k);
                worst = worst.max((a - d.trigonometric_moment_numerical(k)).norm() / a.norm().max(1e-6));
            }
        }
        let t = HypertoroidalWN::new(vec![1.0, 2.0], random_spd(2, &mut rng))?;
        let a = t.trigonometric_moment(&[1, 1]);
        worst = worst.max((a - t.trigonometric_moment_numerical(&[1, 1])).norm() / a.norm().max(1e-6));
    }
    Ok((worst <= 1e-6, format!("worst relative deviation {worst:.1e}")))
}

fn tv_on_grid(p: &dyn Fn(f64) -> f64, q: &dyn Fn(f64) -> f64) -> f64 {
    let n = 4000;
    let h = TWO_PI / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let z: f64 = xs.iter().map(|&x| q(x)).sum::<f64>() * h;
    xs.iter().map(|&x| (p(x) - q(x) / z).abs()).sum::<f64>() * h * 0.5
}

fn closures() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let a = VonMises::new(rng.random_range(0.0..TWO_PI), rng.random_range(0.0..10.0))?;
        let b = VonMises::new(rng.random_range(0.0..TWO_PI), rng.random_range(0.0..10.0))?;
        let c = a.multiply(&b)?;
        worst = worst.max(tv_on_grid(&|x| c.pdf(x), &|x| a.pdf(x) * b.pdf(x)));

        let a = WrappedNormal::new(rng.random_range(0.0..TWO_PI), rng.random_range(0.2..1.5))?;
        let b = WrappedNormal::new(rng.random_range(0.0..TWO_PI), rng.random_range(0.2..1.5))?;
        let c = a.convolve(&b)?;
        let n = 512;
        let h = TWO_PI / n as f64;
        let conv = |x: f64| (0..n).map(|j| a.pdf(j as f64 * h) * b.pdf(x - j as f64 * h)).sum::<f64>() * h;
        worst = worst.max(tv_on_grid(&|x| c.pdf(x), &conv));

        let m = Matrix2::new(0.3, -0.2, 0.1, 0.4);
        let ta = ToroidalVMMatrix::new([1.0, 2.0], [rng.random_range(0.5..3.0), 1.0], m)?;
        let tb = ToroidalVMMatrix::new([2.0, 1.0], [1.0, rng.random_range(0.5..3.0)], -m)?;
        let tc = ta.multiply(&tb)?;
        let n = 100;
        let h = TWO_PI / n as f64;
        let pts: Vec<[f64; 2]> = (0..n * n).map(|i| [(i / n) as f64 * h, (i % n) as f64 * h]).collect();
        let z: f64 = pts.iter().map(|x| ta.pdf(x) * tb.pdf(x)).sum::<f64>() * h * h;
        let tv = pts.iter().map(|x| (tc.pdf(x) - ta.pdf(x) * tb.pdf(x) / z).abs()).sum::<f64>() * h * h * 0.5;
        worst = worst.max(tv);
    }
    let a = VonMisesFisher::new(&[0.0, 0.0, 1.0], 2.0)?;
    let b = VonMisesFisher::new(&[0.0, 1.0, 0.0], 3.0)?;
    let c = a.multiply(&b)?;
    let z = crate::numerics::integrate_sphere(|x| a.pdf(x) * b.pdf(x), 3, 1e-10)?;
    let tv = 0.5 * crate::numerics::integrate_sphere(|x| (c.pdf(x) - a.pdf(x) * b.pdf(x) / z).abs(), 3, 1e-9)?;
    worst = worst.max(tv);
    let ba = BinghamDist::new(DMatrix::identity(3, 3), &[-2.0, -1.0, 0.0])?;
    let bb = BinghamDist::from_parameter_matrix(&DMatrix::from_row_slice(3, 3, &[-1.0, 0.5, 0.0, 0.5, -0.5, 0.2, 0.0, 0.2, 0.0]))?;
    let bc = ba.multiply(&bb)?;
    let z = crate::numerics::integrate_sphere(|x| ba.pdf(x) * bb.pdf(x), 3, 1e-10)?;
    let tv = 0.5 * crate::numerics::integrate_sphere(|x| (bc.pdf(x) - ba.pdf(x) * bb.pdf(x) / z).abs(), 3, 1e-9)?;
    worst = worst.max(tv);
    Ok((worst <= 1e-6, format!("worst TV {worst:.1e}")))
}

fn complex_sphere() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let b = DMatrix::from_row_slice(2, 2, &[c(-2.0, 0.0), c(0.5, 0.3), c(0.5, -0.3), c(-0.5, 0.0)]);
    let area = 2.0 * std::f64::consts::PI.powi(2);
    let n = 100_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let z = uniform_complex(2, &mut rng);
        let v = area * (z.adjoint() * &b * &z)[(0, 0)].re.exp();
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / (n - 1) as f64).sqrt();
    let zscore = (mean - cb_log_norm(&b)?.exp()).abs() / se;

    let cb = ComplexBingham::new(b.clone())?;
    let real = BinghamDist::from_parameter_matrix(&cb_to_real(&b))?;
    let mut dev = 0.0f64;
    for _ in 0..20 {
        let z = uniform_complex(2, &mut rng);
        let x: Vec<f64> = z.iter().flat_map(|v| [v.re, v.im]).collect();
        dev = dev.max((cb.pdf(z.as_slice()) / real.pdf(&x) - 1.0).abs());
    }

    let unit = |v: &[(f64, f64)]| {
        let z: Vec<Complex64> = v.iter().map(|&(a, b)| c(a, b)).collect();
        let s = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        z.iter().map(|v| v / s).collect::<Vec<_>>()
    };
    let w1 = unit(&[(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]);
    let w2 = unit(&[(1.0, 0.1), (-1.0, 0.1), (-1.0, -0.1), (1.0, -0.1)]);
    let truth = ComplexWatsonMixture::new(vec![ComplexWatson::new(&w1, 100.0)?, ComplexWatson::new(&w2, 100.0)?], vec![0.5, 0.5])?;
    let mut good = 0;
    for run in 0..3u64 {
        let samples = truth.sample(1000, &mut rng);
        let em = ComplexWatsonMixture::fit_em(&samples, 2, run, 200, 1e-8)?;
        let hit = [&w1, &w2].iter().all(|w| {
            em.mixture
                .components()
                .iter()
                .map(|k| k.w().iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm())
                .fold(0.0, f64::max)
                >= 0.99
        });
        good += hit as usize;
    }
    Ok((
        zscore <= 3.0 && dev <= 1e-8 && good == 3,
        format!("normalizer {zscore:.2} SE, embedding deviation {dev:.1e}, EM {good}/3"),
    ))
}

fn filters_vs_bayes() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let prior = WrappedNormal::new(rng.random_range(0.0..TWO_PI), rng.random_range(0.3..1.0))?;
        let sys = WrappedNormal::new(0.0, rng.random_range(0.1..0.5))?;
        let meas = WrappedNormal::new(0.0, rng.random_range(0.2..0.6))?;
        let z = (prior.sample(1, &mut rng)[0].value() + sys.sample(1, &mut rng)[0].value() + meas.sample(1, &mut rng)[0].value())
            .rem_euclid(TWO_PI);
        let pred = prior.convolve(&sys)?;
        let lik = |x: f64| meas.pdf(z - x);
        let zn = integrate(|x| pred.pdf(x) * lik(x), 0.0, TWO_PI, 1e-12)?;
        let re = integrate(|x| pred.pdf(x) * lik(x) * x.cos(), 0.0, TWO_PI, 1e-12)? / zn;
        let im = integrate(|x| pred.pdf(x) * lik(x) * x.sin(), 0.0, TWO_PI, 1e-12)? / zn;
        let exact = crate::wrap(im.atan2(re))?;

        let mut means = vec![];
        let mut wn = WnFilter::new(prior.clone());
        wn.predict_identity(&sys)?;
        wn.update_identity(z, &meas)?;
        means.push(wn.estimate().mu());
        let mut f = FourierFilter::from_density(&prior, 101, Transformation::Identity)?;
        f.predict_identity(&sys)?;
        f.update_identity(z, &meas)?;
        means.push(f.estimate().circular_mean()?);
        let mut g = GridFilter::from_density(&prior, 200)?;
        g.predict_identity(&sys)?;
        g.update(&lik)?;
        means.push(g.circular_mean()?);
        let mut p = PwcFilter::new(crate::circular::PiecewiseConstant::from_density(&prior, 200)?);
        p.predict(&pwc_transition_from_noise(&sys, 200)?)?;
        p.update(&lik)?;
        means.push(p.estimate().circular_mean()?);
        let mut pf = CircularParticleFilter::new(10_000, &prior, &mut rng)?;
        pf.predict_identity(&sys, &mut rng)?;
        pf.update(&lik, &mut rng)?;
        means.push(pf.estimate()?.circular_mean()?);
        for m in means {
            worst = worst.max(crate::angular_distance(m, exact));
        }
    }
    Ok((worst <= 0.05, format!("worst mean error {worst:.1e} rad")))
}

fn se2() -> Result<(bool, String)> {
    let b = Se2Bingham::from_blocks(
        Matrix2::new(-1.0, 0.4, 0.4, 0.5),
        Matrix2::new(0.3, -0.2, 0.1, 0.6),
        Matrix2::new(-1.2, 0.3, 0.3, -0.8),
    )?;
    let reach = 12.0;
    let num = integrate_box(
        |v| {
            let p = Se2Point { angle_pair: [v[0].cos(), v[0].sin()], translation: [v[1], v[2]] };
            b.pdf(&p)
        },
        &[(0.0, TWO_PI), (-reach, reach), (-reach, reach)],
        1e-7,
    )?;
    let p = Se2PartiallyWrappedNormal::new([1.0, 0.5, -0.5], Matrix3::new(0.5, 0.1, 0.0, 0.1, 1.0, 0.2, 0.0, 0.2, 0.8))?;
    let th = 2.0;
    let marg = integrate_box(|v| p.pdf(&[th, v[0], v[1]]), &[(-10.0, 11.0), (-11.0, 10.0)], 1e-12)?;
    let wn = p.marginal_angle();
    let rel_m = (marg / wn.pdf(th) - 1.0).abs();
    let g = p.marginal_translation();
    let xy = [0.7, -0.2];
    let tm = integrate(|t| p.pdf(&[t, xy[0], xy[1]]), 0.0, TWO_PI, 1e-13)?;
    let rel_t = (tm / g.pdf(&xy) - 1.0).abs();
    let _ = DVector::<f64>::zeros(0);
    Ok((
        (num - 1.0).abs() <= 1e-3 && rel_m.max(rel_t) <= 1e-6,
        format!("normalized mass {num:.6}, marginal deviation {:.1e}", rel_m.max(rel_t)),
    ))
}
