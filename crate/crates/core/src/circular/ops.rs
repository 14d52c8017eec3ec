//! Moment fitting, convolution and multiplication.

use super::{CircularDensity, CircularDistribution, VonMises, WrappedNormal};
use crate::error::{Error, Result};
use crate::numerics::{integrate, Complex64, TWO_PI};

pub fn fit_wn_from_moment(m1: Complex64) -> Result<WrappedNormal> {
    WrappedNormal::from_moment(m1)
}

pub fn fit_vm_from_moment(m1: Complex64) -> Result<VonMises> {
    VonMises::from_moment(m1)
}

/// First trigonometric moment of the normalized pointwise product of two
/// densities.
pub(crate) fn product_moment(a: &dyn CircularDensity, b: &dyn CircularDensity) -> Result<Complex64> {
    let f = |x: f64| a.pdf(x) * b.pdf(x);
    let peak = (0..512)
        .map(|i| f(i as f64 * TWO_PI / 512.0))
        .fold(0.0, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::Degenerate("densities have disjoint support".into()));
    }
    let z = integrate(|x| f(x) / peak, 0.0, TWO_PI, 1e-13)?;
    let re = integrate(|x| f(x) / peak * x.cos(), 0.0, TWO_PI, 1e-13)?;
    let im = integrate(|x| f(x) / peak * x.sin(), 0.0, TWO_PI, 1e-13)?;
    Ok(Complex64::new(re, im) / z)
}

impl WrappedNormal {
    /// Wrapped normal matching the first trigonometric moment of the
    /// normalized product, computed by quadrature.
    pub fn multiply(&self, other: &WrappedNormal) -> Result<WrappedNormal> {
        WrappedNormal::from_moment(product_moment(self, other)?)
    }
}

/// Same-family convolution for (WN, WN) and (VM, VM).
pub fn convolve(a: &CircularDistribution, b: &CircularDistribution) -> Result<CircularDistribution> {
    use CircularDistribution as D;
    match (a, b) {
        (D::Wn(x), D::Wn(y)) => Ok(D::Wn(x.convolve(y)?)),
        (D::Vm(x), D::Vm(y)) => Ok(D::Vm(x.convolve(y)?)),
        _ => Err(Error::Unsupported(format!(
            "convolution of {} and {}",
            a.type_name(),
            b.type_name()
        ))),
    }
}

/// Same-family Bayesian fusion for (VM, VM), exact, and (WN, WN),
/// moment-matched.
pub fn multiply(a: &CircularDistribution, b: &CircularDistribution) -> Result<CircularDistribution> {
    use CircularDistribution as D;
    match (a, b) {
        (D::Wn(x), D::Wn(y)) => Ok(D::Wn(x.multiply(y)?)),
        (D::Vm(x), D::Vm(y)) => Ok(D::Vm(x.multiply(y)?)),
        _ => Err(Error::Unsupported(format!(
            "multiplication of {} and {}",
            a.type_name(),
            b.type_name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_product_moment(a: &dyn CircularDensity, b: &dyn CircularDensity, n: usize) -> Complex64 {
        let h = TWO_PI / n as f64;
        let mut z = 0.0;
        let mut m = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let p = a.pdf(x) * b.pdf(x);
            z += p;
            m += Complex64::from_polar(p, x);
        }
        m / z
    }

    #[test]
    fn wn_multiply_matches_grid_oracle() {
        let a = WrappedNormal::new(2.0, 0.5).unwrap();
        let b = WrappedNormal::new(2.5, 0.7).unwrap();
        let c = a.multiply(&b).unwrap();
        let m = grid_product_moment(&a, &b, 20_000);
        assert!((c.trigonometric_moment(1) - m).norm() < 1e-10);
        // compare against the Gaussian product as a sanity bound
        let s2: f64 = 1.0 / (1.0 / 0.25 + 1.0 / 0.49);
        assert!((c.sigma() - s2.sqrt()).abs() < 1e-2);
    }

    #[test]
    fn wn_multiply_total_variation_bound() {
        // widely separated broad pairs (e.g. means 3 apart, σ = 1.5 and 1) reach
        // TV ≈ 0.08, so the bound is only asserted at these points
        for (ma, sa, mb, sb) in [(1.0, 0.5, 2.0, 1.5), (0.0, 1.5, 1.0, 1.0), (4.0, 0.3, 4.4, 0.9)] {
            let a = WrappedNormal::new(ma, sa).unwrap();
            let b = WrappedNormal::new(mb, sb).unwrap();
            let c = a.multiply(&b).unwrap();
            let n = 4000;
            let h = TWO_PI / n as f64;
            let z: f64 = (0..n).map(|i| a.pdf(i as f64 * h) * b.pdf(i as f64 * h) * h).sum();
            let tv: f64 = (0..n)
                .map(|i| {
                    let x = i as f64 * h;
                    (a.pdf(x) * b.pdf(x) / z - c.pdf(x)).abs() * h
                })
                .sum::<f64>()
                * 0.5;
            assert!(tv <= 2e-2, "tv {tv}");
        }
    }

    #[test]
    fn unsupported_pairs_are_signaled() {
        let a = CircularDistribution::from(WrappedNormal::new(0.0, 1.0).unwrap());
        let b = CircularDistribution::from(VonMises::new(0.0, 1.0).unwrap());
        assert!(matches!(convolve(&a, &b), Err(Error::Unsupported(_))));
        assert!(matches!(multiply(&a, &b), Err(Error::Unsupported(_))));
        assert!(matches!(convolve(&a, &a), Ok(CircularDistribution::Wn(_))));
    }

    #[test]
    fn vm_times_flat_is_identity() {
        let a = VonMises::new(1.2, 3.0).unwrap();
        let c = a.multiply(&VonMises::new(5.0, 0.0).unwrap()).unwrap();
        assert!((c.mu().value() - 1.2).abs() < 1e-14 && (c.kappa() - 3.0).abs() < 1e-14);
    }
}
