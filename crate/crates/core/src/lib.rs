pub mod circular;
pub mod complex;
pub mod error;
pub mod filters;
pub mod fourier;
pub mod hypersphere;
pub mod hypertorus;
pub mod numerics;
pub mod se2;
pub mod selftest;

pub use error::{Error, Result};
pub use numerics::{angular_distance, wrap, Angle, Complex64, TWO_PI};
