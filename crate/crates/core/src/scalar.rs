//! Floating-point scalar abstraction.

use num_traits::{Float, FromPrimitive, NumAssign};

/// Scalar type for the numeric core: `f32` or `f64`.
///
/// `fl` converts literal constants, `us` converts counts; both panic only on
/// values that do not fit the target type, which never happens for the
/// constants used in this crate.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + std::str::FromStr
    + serde::Serialize
    + Send
    + Sync
    + 'static
{
    #[inline]
    fn fl(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable")
    }

    #[inline]
    fn us(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar is finite")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
