//! Numeric abstraction shared by the exact evaluation paths.
//!
//! Everything in the analytic engine and the game analysis only needs field
//! arithmetic and an ordering, so it runs unchanged on `f32`, `f64` and exact
//! rationals. The Monte Carlo simulators are concrete over `f64`.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like scalar usable by the analytic engine.
pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Exact conversion of a small count (subset sizes, slot counts).
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy view used for reporting and tolerance checks.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Copy
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Send
        + Sync
        + 'static
{
}

/// Product of `1 - x` over the iterator; the empty product is one.
pub(crate) fn complement_product<T: Scalar>(xs: impl IntoIterator<Item = T>) -> T {
    xs.into_iter().fold(T::one(), |acc, x| acc * (T::one() - x))
}
