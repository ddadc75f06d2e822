//! Scalar abstraction for the numeric core.
//!
//! Everything below the simulator (geometry, projection solver, oracles,
//! node state machine) is generic over [`Scalar`] so the core runs in either
//! `f32` or `f64`. Wire formats and experiment artifacts are always `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable by the solver core.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static {
    /// Lossy conversion from `f64`, used for tolerances and literals.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion to `f64`, used when crossing into wire formats.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
