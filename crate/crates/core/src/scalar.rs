//! Scalar abstraction: the whole crate is generic over the floating-point
//! type carrying intensities, drift samples and solver state.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar for image intensities and solver arithmetic.
///
/// Implemented for `f32` and `f64`. All published tolerances assume `f64`;
/// `f32` is available for memory-bound experiments.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + num_traits::NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Magnitude below which a BiCGSTAB scalar (rho, omega) counts as a
    /// numerical zero and triggers the breakdown path.
    fn breakdown_threshold() -> Self;
}

impl Scalar for f64 {
    fn breakdown_threshold() -> Self {
        1e-300
    }
}

impl Scalar for f32 {
    fn breakdown_threshold() -> Self {
        1e-30
    }
}

/// Shorthand for converting an `f64` literal into the working scalar type.
#[inline]
pub fn fl<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal must convert into the scalar type")
}
