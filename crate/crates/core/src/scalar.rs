//! Scalar abstraction shared by every numeric module.
//!
//! The signal chain and the recovery algorithm are written once over [`Real`]
//! and instantiated for `f32` and `f64`. The simulation harness runs in `f64`;
//! the noiseless recovery guarantees only hold at double precision because the
//! observation matrix has nearly collinear neighbouring columns.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point type the crate can compute in.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + FftNum
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into `Self`, rounding if needed.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits in float")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Absolute value; spelled out because both `Float` and `Signed` provide `abs`.
    #[inline]
    fn magnitude(self) -> Self {
        Float::abs(self)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex sample type.
pub type Cx<T> = Complex<T>;

/// Squared Euclidean norm of a complex vector.
pub fn energy<T: Real>(v: &[Cx<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Euclidean norm of a complex vector.
pub fn norm<T: Real>(v: &[Cx<T>]) -> T {
    energy(v).sqrt()
}

/// `a^H b`.
pub fn inner<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Cx::new(T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}
