//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All algebra, calculus and lattice code is written against [`Scalar`], so the
//! same implementation runs in `f32` and `f64`. The per-type constants are the
//! tolerances whose sensible values depend on the unit roundoff.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};

pub trait Scalar: Float + FloatConst + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Relative tolerance on the grade-2/3 residue of a paravector-valued result.
    fn grade_tol() -> Self;

    /// Norm below which a paravector is treated as zero (a pole) by `inverse`.
    fn zero_norm_eps() -> Self;

    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the finite literals used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize(n: usize) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("integer representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    #[inline]
    fn grade_tol() -> Self {
        1e-12
    }
    #[inline]
    fn zero_norm_eps() -> Self {
        1e-14
    }
}

impl Scalar for f32 {
    #[inline]
    fn grade_tol() -> Self {
        2e-5
    }
    #[inline]
    fn zero_norm_eps() -> Self {
        1e-14
    }
}

/// `n!` as a scalar.
pub fn factorial<T: Scalar>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize(k))
}
