//! Floating point abstraction shared by every kernel in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the couplings are evaluated in: `f32` or `f64`.
///
/// On top of [`Float`] this adds the complementary error function, which
/// `num-traits` does not provide but the Ewald-split mode sum needs.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    fn erfc(self) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

impl Real for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

/// Tolerance for "this vector is a unit vector" checks.
pub(crate) fn unit_tolerance<T: Real>() -> T {
    T::epsilon() * T::lit(64.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_matches_reference_points() {
        assert!((Real::erfc(0.0_f64) - 1.0).abs() < 1e-16);
        assert!((Real::erfc(1.0_f64) - 0.157_299_207_050_285_13).abs() < 1e-15);
        assert!((Real::erfc(1.0_f32) - 0.157_299_2).abs() < 1e-6);
    }
}
