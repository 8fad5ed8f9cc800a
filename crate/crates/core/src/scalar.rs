use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point intensity type: `f32` or `f64`.
///
/// All random draws are made in `f64` and narrowed with [`Scalar::of`], so an
/// `f32` pipeline consumes exactly the same random sequence as an `f64` one.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + rustfft::FftNum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or draw into this scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("scalar widens to f64")
    }

    /// Clamps into the unit interval; NaN maps to 0.
    #[inline]
    fn clamp_unit(self) -> Self {
        if self.is_nan() {
            Self::zero()
        } else {
            self.max(Self::zero()).min(Self::one())
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
