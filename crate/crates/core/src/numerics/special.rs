//! Modified Bessel functions of the first kind, their ratios, and confluent
//! hypergeometric series.

use crate::error::{Error, Result};

pub use statrs::function::erf::erf;

/// Standard normal cumulative distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

const SERIES_SWITCH: f64 = 20.0;

fn use_hankel(nu: f64, x: f64) -> bool {
    x > SERIES_SWITCH && nu * nu < 0.25 * x
}

/// Hankel large-argument sum `Σ (-1)^k a_k(ν) / x^k`, without the
/// `e^x / sqrt(2πx)` prefactor.
fn hankel_sum(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `ln Σ_j (x²/4)^j / (j! Γ(ν+j+1))`, the power series of `I_ν(x)/(x/2)^ν`.
fn log_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut log_scale = -ln_gamma(nu + 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = 0.0;
    loop {
        j += 1.0;
        term *= q / (j * (nu + j));
        sum += term;
        if sum > 1e250 {
            log_scale += sum.ln();
            term /= sum;
            sum = 1.0;
        }
        if term < 1e-17 * sum && j > q.sqrt() {
            break;
        }
        if j > 1e7 {
            break;
        }
    }
    log_scale + sum.ln()
}

/// `ln I_ν(x)` for `ν ≥ 0`, `x ≥ 0`.
pub fn log_bessel_i(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if use_hankel(nu, x) {
        x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + hankel_sum(nu, x).ln()
    } else {
        nu * (0.5 * x).ln() + log_series(nu, x)
    }
}

/// Modified Bessel function of the first kind `I_ν(x)`.
pub fn bessel_i(nu: f64, x: f64) -> f64 {
    log_bessel_i(nu, x).exp()
}

/// `I_{ν+1}(x) / I_ν(x)`.
pub fn bessel_i_ratio(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if use_hankel(nu + 1.0, x) {
        hankel_sum(nu + 1.0, x) / hankel_sum(nu, x)
    } else {
        (log_bessel_i(nu + 1.0, x) - log_bessel_i(nu, x)).exp()
    }
}

/// Mean resultant length `A_d(κ) = I_{d/2}(κ) / I_{d/2-1}(κ)` of a
/// von Mises–Fisher distribution on `S^{d-1}`.
pub fn bessel_ratio(d: usize, kappa: f64) -> f64 {
    assert!(d >= 2, "bessel_ratio requires d >= 2");
    bessel_i_ratio(d as f64 / 2.0 - 1.0, kappa)
}

/// Solves `A_d(κ) = r` for `κ`.
pub fn inverse_bessel_ratio(d: usize, r: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::param("d", "must be at least 2"));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Degenerate(format!(
            "mean resultant length {r} outside [0, 1)"
        )));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let df = d as f64;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while bessel_ratio(d, hi) < r {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Degenerate(format!(
                "mean resultant length {r} too close to 1"
            )));
        }
    }
    let mut kappa = (r * (df - r * r) / (1.0 - r * r)).clamp(lo, hi);
    for _ in 0..100 {
        let a = bessel_ratio(d, kappa);
        let f = a - r;
        if f.abs() < 1e-15 {
            break;
        }
        if f < 0.0 {
            lo = kappa;
        } else {
            hi = kappa;
        }
        let deriv = 1.0 - a * a - (df - 1.0) * a / kappa;
        let mut next = kappa - f / deriv;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - kappa).abs() <= 1e-15 * kappa {
            kappa = next;
            break;
        }
        kappa = next;
    }
    Ok(kappa)
}

/// `ln M(a, b, x)` for the Kummer function via its power series. Negative
/// arguments go through Kummer's transformation so that all summed terms
/// are positive for `b > a > 0`.
pub fn log_kummer_m(a: f64, b: f64, x: f64) -> f64 {
    if x < 0.0 && b - a >= 0.0 {
        return x + log_kummer_m(b - a, b, -x);
    }
    let mut log_scale = 0.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = 0.0;
    loop {
        term *= (a + j) * x / ((b + j) * (j + 1.0));
        j += 1.0;
        sum += term;
        if sum.abs() > 1e250 {
            log_scale += sum.abs().ln();
            term /= sum.abs();
            sum /= sum.abs();
        }
        if term.abs() < 1e-16 * sum.abs() && j > x.abs() - b {
            break;
        }
        if j > 1e7 {
            break;
        }
    }
    log_scale + sum.ln()
}

pub fn kummer_m(a: f64, b: f64, x: f64) -> f64 {
    log_kummer_m(a, b, x).exp()
}

fn log_factorial(n: u32) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Truncated exponential series `Σ_{j=0}^{m} κ^j/j!`.
fn exp_partial(m: i64, kappa: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = if m >= 0 { 1.0 } else { 0.0 };
    for j in 1..=m {
        term *= kappa / j as f64;
        sum += term;
    }
    sum
}

fn closed_form_applies(n: u32, kappa: f64) -> bool {
    kappa.abs() > n as f64 + 20.0
}

/// `ln ₁F₁(1; n; κ)` for integer `n ≥ 2`.
pub fn log_kummer_1f1_elementary(n: u32, kappa: f64) -> f64 {
    assert!(n >= 2, "kummer_1f1_elementary requires n >= 2");
    if !closed_form_applies(n, kappa) {
        return log_kummer_m(1.0, n as f64, kappa);
    }
    let p = exp_partial(n as i64 - 2, kappa);
    if kappa > 0.0 {
        // (n−1)! κ^{1−n} e^κ (1 − e^{−κ} P(κ))
        log_factorial(n - 1) + (1.0 - n as f64) * kappa.ln() + kappa + (-(-kappa).exp() * p).ln_1p()
    } else {
        let value = log_factorial(n - 1).exp() * kappa.powi(1 - n as i32) * (kappa.exp() - p);
        value.ln()
    }
}

/// `₁F₁(1; n; κ) = (n−1)! κ^{1−n} (e^κ − Σ_{j=0}^{n−2} κ^j/j!)`.
pub fn kummer_1f1_elementary(n: u32, kappa: f64) -> f64 {
    log_kummer_1f1_elementary(n, kappa).exp()
}

/// `d/dκ ln ₁F₁(1; n; κ)`.
pub fn kummer_1f1_log_derivative(n: u32, kappa: f64) -> f64 {
    let nf = n as f64;
    if !closed_form_applies(n, kappa) {
        // d/dκ M(1,n,κ) = M(2,n+1,κ)/n
        return (log_kummer_m(2.0, nf + 1.0, kappa) - log_kummer_m(1.0, nf, kappa)).exp() / nf;
    }
    // with T = e^κ − P_{n−2}: d ln F = (1−n)/κ + 1 + κ^{n−2}/((n−2)! T)
    let top = (nf - 2.0) * kappa.abs().ln() - log_factorial(n - 2);
    let t = kappa.exp() - exp_partial(n as i64 - 2, kappa);
    let sign_top = if kappa < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let ratio = if kappa > 0.0 {
        sign_top * (top - kappa).exp() / (1.0 - (-kappa).exp() * exp_partial(n as i64 - 2, kappa))
    } else {
        sign_top * top.exp() / t
    };
    (1.0 - nf) / kappa + 1.0 + ratio
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct power series of I_ν in plain floating point, valid for moderate x.
    fn bessel_series_oracle(nu: f64, x: f64) -> f64 {
        let mut term = (0.5 * x).powf(nu) / ln_gamma(nu + 1.0).exp();
        let mut sum = term;
        for j in 1..400 {
            let j = j as f64;
            term *= 0.25 * x * x / (j * (nu + j));
            sum += term;
        }
        sum
    }

    #[test]
    fn bessel_matches_series_oracle() {
        for &nu in &[0.0, 0.5, 1.0, 1.5, 3.0] {
            for &x in &[0.01, 0.5, 1.0, 5.0, 19.9, 20.1, 35.0, 60.0] {
                let got = bessel_i(nu, x);
                let want = bessel_series_oracle(nu, x);
                assert!(((got - want) / want).abs() < 1e-12, "nu={nu} x={x} {got} {want}");
            }
        }
    }

    #[test]
    fn bessel_ratio_examples() {
        for d in 2..6 {
            assert_eq!(bessel_ratio(d, 0.0), 0.0);
        }
        for &k in &[0.1f64, 1.0, 7.0, 30.0, 300.0] {
            let closed: f64 = 1.0 / k.tanh() - 1.0 / k;
            assert!((bessel_ratio(3, k) - closed).abs() < 1e-12, "k={k}");
        }
        let a2 = bessel_series_oracle(1.0, 1.0) / bessel_series_oracle(0.0, 1.0);
        assert!((bessel_ratio(2, 1.0) - a2).abs() < 1e-12);
        // half-integer order against the closed form sinh/cosh expressions
        let x: f64 = 2.5;
        let i_half = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sinh();
        assert!((bessel_i(0.5, x) - i_half).abs() < 1e-12 * i_half);
    }

    #[test]
    fn large_argument_is_continuous_at_switch() {
        let below = bessel_ratio(2, 20.0 - 1e-9);
        let above = bessel_ratio(2, 20.0 + 1e-9);
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn inverse_rejects_degenerate() {
        assert!(inverse_bessel_ratio(2, 1.0).is_err());
        assert!(inverse_bessel_ratio(2, -0.1).is_err());
        assert_eq!(inverse_bessel_ratio(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_by_bisection_oracle() {
        // plain bisection as an independent root finder
        let r = 0.4296;
        let (mut lo, mut hi) = (0.0, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bessel_ratio(2, mid) < r {
                lo = mid
            } else {
                hi = mid
            }
        }
        let k = inverse_bessel_ratio(2, r).unwrap();
        assert!((k - lo).abs() < 1e-9);
    }

    fn kummer_power_series(n: u32, kappa: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 0..200 {
            term *= kappa / (n as f64 + j as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn kummer_examples() {
        assert!((kummer_1f1_elementary(5, 0.0) - 1.0).abs() < 1e-15);
        assert!((kummer_1f1_elementary(2, 1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-13);
        let want = kummer_power_series(4, 2.5);
        assert!(((kummer_1f1_elementary(4, 2.5) - want) / want).abs() < 1e-12);
    }

    #[test]
    fn kummer_closed_form_region_matches_series() {
        for &n in &[2u32, 3, 4, 6] {
            for &k in &[-49.0, -30.0, -5.0, 0.3, 10.0, 30.0, 50.0] {
                let want = kummer_power_series(n, k);
                if k < -20.0 {
                    // alternating series loses digits, compare against transformed series
                    let t = (k + log_kummer_m(n as f64 - 1.0, n as f64, -k)).exp();
                    let got = kummer_1f1_elementary(n, k);
                    assert!(((got - t) / t).abs() < 1e-10, "n={n} k={k}");
                    continue;
                }
                let got = kummer_1f1_elementary(n, k);
                assert!(((got - want) / want).abs() < 1e-10, "n={n} k={k} {got} {want}");
            }
        }
    }

    #[test]
    fn kummer_log_derivative_matches_finite_difference() {
        for &n in &[2u32, 3, 4] {
            for &k in &[-40.0, -3.0, 0.0, 2.0, 25.0, 80.0] {
                let h = 1e-5;
                let fd = (log_kummer_1f1_elementary(n, k + h) - log_kummer_1f1_elementary(n, k - h))
                    / (2.0 * h);
                let d = kummer_1f1_log_derivative(n, k);
                assert!((fd - d).abs() < 1e-7, "n={n} k={k} {fd} {d}");
            }
        }
    }

    proptest! {
        #[test]
        fn inverse_round_trip(kappa in 0.0f64..500.0, d in 2usize..6) {
            let r = bessel_ratio(d, kappa);
            let back = inverse_bessel_ratio(d, r).unwrap();
            prop_assert!((bessel_ratio(d, back) - r).abs() < 1e-10);
            prop_assert!((back - kappa).abs() < 1e-9 * kappa.max(1.0));
        }

        #[test]
        fn ratio_monotone(k in 0.0f64..400.0, dk in 1e-3f64..5.0) {
            prop_assert!(bessel_ratio(2, k + dk) > bessel_ratio(2, k));
        }
    }
}
