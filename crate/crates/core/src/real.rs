//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar the solvers are generic over.
///
/// Implemented for `f32` and `f64`. Default tolerances are expressed in
/// `f64` and clamped from below by a few hundred ulps of the concrete type,
/// so the `f32` instantiation stays usable with looser guarantees.
pub trait Real: Float + FromPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// A tolerance of `x`, never tighter than `ulps` machine epsilons.
    #[inline]
    fn tol(x: f64, ulps: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(ulps))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn max_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).fold(T::zero(), T::max)
}

pub(crate) fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().map(|x| x.abs()).fold(T::zero(), T::max)
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}
