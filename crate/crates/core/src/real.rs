//! Scalar abstraction for the whole toolkit.
//!
//! All numerical code is generic over [`Real`]; `f64` is what the CLI and the
//! verification suites instantiate, `f32` is available for quick smoke runs.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable everywhere in the toolkit.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for pulling `f64` literals (tolerances, table constants) into `T`.
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal not representable in scalar type")
}

/// `usize` to scalar conversion.
pub(crate) fn usz<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize not representable in scalar type")
}
