//! Double-double arithmetic.
//!
//! [`DDouble`] represents a number as an unevaluated sum `hi + lo` of two
//! `f64` values with `|lo| <= ulp(hi)/2`, giving roughly 106 bits of
//! significand (about 32 decimal digits). The arithmetic follows the
//! classical error-free transformations (Dekker's product via FMA, Knuth's
//! two-sum) as used in the QD library and its descendants.
//!
//! The point of this type is not speed: it exists so that the solver can run
//! unchanged at a precision where `sqrt(epsilon) ~ 1e-16`, which turns
//! otherwise unreachable tolerances into ordinary ones. See the guide's
//! chapter on extended precision.
//!
//! ```
//! use hsdlp::dd::DDouble;
//! use hsdlp::scalar::Real;
//!
//! let third = DDouble::from_f64(1.0) / DDouble::from_f64(3.0);
//! let err = third * DDouble::from_f64(3.0) - DDouble::from_f64(1.0);
//! assert!(err.abs() < DDouble::from_f64(1e-31));
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::scalar::Real;

/// `hi + lo` pair with ~106-bit significand.
#[derive(Copy, Clone, Default)]
pub struct DDouble {
    hi: f64,
    lo: f64,
}

/// Error-free sum: `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free sum assuming `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = f64::mul_add(a, b, -p);
    (p, e)
}

impl DDouble {
    pub const ZERO: DDouble = DDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DDouble = DDouble { hi: 1.0, lo: 0.0 };

    /// Builds from components without renormalizing; callers must guarantee
    /// `hi + lo == hi` in the sense of the double-double invariant.
    #[inline]
    fn from_parts(hi: f64, lo: f64) -> Self {
        DDouble { hi, lo }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }
}

impl Add for DDouble {
    type Output = DDouble;

    #[inline]
    fn add(self, rhs: DDouble) -> DDouble {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (s1, s2) = quick_two_sum(s1, s2 + t2);
        DDouble::from_parts(s1, s2)
    }
}

impl Neg for DDouble {
    type Output = DDouble;

    #[inline]
    fn neg(self) -> DDouble {
        DDouble::from_parts(-self.hi, -self.lo)
    }
}

impl Sub for DDouble {
    type Output = DDouble;

    #[inline]
    fn sub(self, rhs: DDouble) -> DDouble {
        self + (-rhs)
    }
}

impl Mul for DDouble {
    type Output = DDouble;

    #[inline]
    fn mul(self, rhs: DDouble) -> DDouble {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (s1, s2) = quick_two_sum(p1, p2);
        DDouble::from_parts(s1, s2)
    }
}

impl Div for DDouble {
    type Output = DDouble;

    /// Long division with two correction steps (accurate to the last bit of
    /// the double-double format for finite well-scaled operands).
    fn div(self, rhs: DDouble) -> DDouble {
        let q1 = self.hi / rhs.hi;
        let mut r = self - rhs.mul_f64(q1);
        let q2 = r.hi / rhs.hi;
        r = r - rhs.mul_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s1, s2) = quick_two_sum(q1, q2);
        DDouble::from_parts(s1, s2) + DDouble::from_parts(q3, 0.0)
    }
}

impl DDouble {
    /// Product by a plain double (exact high part via FMA).
    #[inline]
    fn mul_f64(self, b: f64) -> DDouble {
        let (p1, p2) = two_prod(self.hi, b);
        let (s1, s2) = quick_two_sum(p1, p2 + self.lo * b);
        DDouble::from_parts(s1, s2)
    }
}

impl AddAssign for DDouble {
    fn add_assign(&mut self, rhs: DDouble) {
        *self = *self + rhs;
    }
}

impl SubAssign for DDouble {
    fn sub_assign(&mut self, rhs: DDouble) {
        *self = *self - rhs;
    }
}

impl MulAssign for DDouble {
    fn mul_assign(&mut self, rhs: DDouble) {
        *self = *self * rhs;
    }
}

impl DivAssign for DDouble {
    fn div_assign(&mut self, rhs: DDouble) {
        *self = *self / rhs;
    }
}

impl PartialEq for DDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl fmt::Debug for DDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DDouble {
    /// Displays the leading component only; full precision is an internal
    /// concern, logs and solution files are written through `f64`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.hi, f)
    }
}

impl From<f64> for DDouble {
    fn from(v: f64) -> Self {
        DDouble::from_parts(v, 0.0)
    }
}

impl Real for DDouble {
    const NAME: &'static str = "double-double";

    fn zero() -> Self {
        DDouble::ZERO
    }

    fn one() -> Self {
        DDouble::ONE
    }

    fn from_f64(v: f64) -> Self {
        DDouble::from_parts(v, 0.0)
    }

    fn to_f64(self) -> f64 {
        self.hi
    }

    fn epsilon() -> Self {
        // 2^-104: unit roundoff gap of the 106-bit significand.
        DDouble::from_parts(4.930380657631324e-32, 0.0)
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    fn sqrt(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return DDouble::ZERO;
        }
        if self.hi < 0.0 {
            return DDouble::from_parts(f64::NAN, 0.0);
        }
        // Karp & Markstein: one Newton step on 1/sqrt in double precision,
        // then a correction computed in double-double.
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = DDouble::from_parts(ax, 0.0);
        let err = (self - ax_dd * ax_dd).hi;
        ax_dd + DDouble::from_parts(err * (x * 0.5), 0.0)
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}
