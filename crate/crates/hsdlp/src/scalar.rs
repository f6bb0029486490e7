//! Scalar abstraction.
//!
//! Every numeric kernel in this crate is generic over [`Real`], so the same
//! algorithm runs in `f64` or in extended precision ([`crate::dd::DDouble`])
//! without code changes. The trait is deliberately small: it covers exactly
//! the operations an interior-point solver needs (field arithmetic, square
//! root, absolute value, comparisons and finiteness checks) and nothing else.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// A floating-point-like scalar usable by the solver.
///
/// Implementations must behave like a subset of IEEE arithmetic: `epsilon()`
/// is the unit roundoff gap at 1.0, non-finite values propagate through
/// arithmetic, and comparisons follow the usual total order on finite values.
pub trait Real:
    Copy
    + Clone
    + Debug
    + Display
    + Default
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Arithmetic name reported in the solver's log header.
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;

    /// Exact conversion from `f64` (all problem data enters this way).
    fn from_f64(v: f64) -> Self;

    /// Nearest `f64`; used for logging and statistics only.
    fn to_f64(self) -> f64;

    /// Machine epsilon of the representation.
    fn epsilon() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn is_finite(self) -> bool;

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Clamp into `[lo, hi]`.
    fn clamp(self, lo: Self, hi: Self) -> Self {
        self.max(lo).min(hi)
    }

    /// Underflow guard for quantities that are strictly positive in exact
    /// arithmetic: far below every tolerance (`epsilon^4`), far above the
    /// subnormal range.
    fn tiny() -> Self {
        let e = Self::epsilon();
        e * e * e * e
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn epsilon() -> Self {
        f64::EPSILON
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_basics() {
        assert_eq!(f64::NAME, "f64");
        assert_eq!(<f64 as Real>::from_f64(1.5), 1.5);
        assert!(<f64 as Real>::epsilon() < 1e-15);
        assert_eq!(Real::max(1.0, 2.0), 2.0);
        assert_eq!(Real::min(1.0, 2.0), 1.0);
        assert_eq!(Real::clamp(3.0, 0.0, 1.0), 1.0);
    }
}
