use std::fmt;

use crate::scalar::Real;
use crate::sparse::CscMatrix;

/// One side of a two-sided bound; infinities are explicit, never encoded as
/// large magnitudes (sentinels would contaminate norms and scaling).
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Bound<S> {
    NegInf,
    Finite(S),
    PosInf,
}

impl<S: Real> Bound<S> {
    pub fn as_finite(self) -> Option<S> {
        match self {
            Bound::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    /// Negation reverses the infinities.
    pub fn neg(self) -> Self {
        match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::Finite(v) => Bound::Finite(-v),
        }
    }

    /// Shift by a finite amount; infinities absorb it.
    pub fn add(self, d: S) -> Self {
        match self {
            Bound::Finite(v) => Bound::Finite(v + d),
            b => b,
        }
    }

    /// Scale by a nonzero factor, flipping sides for negative factors.
    pub fn scale(self, f: S) -> Self {
        if f < S::zero() {
            self.neg().scale(-f)
        } else {
            match self {
                Bound::Finite(v) => Bound::Finite(v * f),
                b => b,
            }
        }
    }

    /// Extended-real sum (used for row activity intervals). `NegInf + PosInf`
    /// never occurs for same-side interval endpoints.
    pub fn ext_add(self, other: Bound<S>) -> Bound<S> {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            (Bound::NegInf, Bound::PosInf) | (Bound::PosInf, Bound::NegInf) => {
                panic!("indeterminate extended sum")
            }
            (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
            (Bound::PosInf, _) | (_, Bound::PosInf) => Bound::PosInf,
        }
    }

    /// `self <= other` in the extended order.
    pub fn le(self, other: Bound<S>) -> bool {
        match (self, other) {
            (Bound::NegInf, _) | (_, Bound::PosInf) => true,
            (Bound::PosInf, _) | (_, Bound::NegInf) => false,
            (Bound::Finite(a), Bound::Finite(b)) => a <= b,
        }
    }

    /// Larger of the two in the extended order.
    pub fn ext_max(self, other: Bound<S>) -> Bound<S> {
        if self.le(other) {
            other
        } else {
            self
        }
    }

    pub fn ext_min(self, other: Bound<S>) -> Bound<S> {
        if self.le(other) {
            self
        } else {
            other
        }
    }
}

/// Objective sense.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Linear program in the user-facing two-sided form
/// `opt c'x + c0  s.t.  l^b <= Ax <= u^b,  l^x <= x <= u^x`.
#[derive(Clone, Debug)]
pub struct GeneralLP<S> {
    pub sense: Sense,
    pub c: Vec<S>,
    pub c0: S,
    pub a: CscMatrix<S>,
    pub row_lb: Vec<Bound<S>>,
    pub row_ub: Vec<Bound<S>>,
    pub col_lb: Vec<Bound<S>>,
    pub col_ub: Vec<Bound<S>>,
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
}

/// Validation finding; returned, never thrown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    DimensionMismatch(&'static str),
    InvertedRowBounds(usize),
    InvertedColBounds(usize),
    NonFiniteCoefficient(usize, usize),
    NonFiniteCost(usize),
    NonFiniteRowBound(usize),
    NonFiniteColBound(usize),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DimensionMismatch(what) => write!(f, "dimension mismatch: {what}"),
            Diagnostic::InvertedRowBounds(i) => write!(f, "inverted bound on row {i}"),
            Diagnostic::InvertedColBounds(j) => write!(f, "inverted bound on column {j}"),
            Diagnostic::NonFiniteCoefficient(i, j) => {
                write!(f, "non-finite coefficient at ({i},{j})")
            }
            Diagnostic::NonFiniteCost(j) => write!(f, "non-finite cost on column {j}"),
            Diagnostic::NonFiniteRowBound(i) => write!(f, "non-finite bound value on row {i}"),
            Diagnostic::NonFiniteColBound(j) => write!(f, "non-finite bound value on column {j}"),
        }
    }
}

impl<S: Real> GeneralLP<S> {
    /// Minimization problem with default names and free rows/columns bounds
    /// to be filled in by the caller.
    pub fn new(a: CscMatrix<S>, c: Vec<S>) -> Self {
        let m = a.nrows();
        let n = a.ncols();
        assert_eq!(c.len(), n);
        GeneralLP {
            sense: Sense::Minimize,
            c,
            c0: S::zero(),
            a,
            row_lb: vec![Bound::NegInf; m],
            row_ub: vec![Bound::PosInf; m],
            col_lb: vec![Bound::Finite(S::zero()); n],
            col_ub: vec![Bound::PosInf; n],
            row_names: (0..m).map(|i| format!("R{}", i + 1)).collect(),
            col_names: (0..n).map(|j| format!("C{}", j + 1)).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    /// Checks every structural invariant and returns all violations.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let m = self.nrows();
        let n = self.ncols();
        if self.c.len() != n {
            out.push(Diagnostic::DimensionMismatch("objective length"));
        }
        if self.row_lb.len() != m || self.row_ub.len() != m || self.row_names.len() != m {
            out.push(Diagnostic::DimensionMismatch("row arrays"));
        }
        if self.col_lb.len() != n || self.col_ub.len() != n || self.col_names.len() != n {
            out.push(Diagnostic::DimensionMismatch("column arrays"));
        }
        if !out.is_empty() {
            return out;
        }

        for (j, &cj) in self.c.iter().enumerate() {
            if !cj.is_finite() {
                out.push(Diagnostic::NonFiniteCost(j));
            }
        }
        if !self.c0.is_finite() {
            out.push(Diagnostic::NonFiniteCost(usize::MAX));
        }
        for (r, c, v) in self.a.iter() {
            if !v.is_finite() {
                out.push(Diagnostic::NonFiniteCoefficient(r, c));
            }
        }
        for i in 0..m {
            if bound_value_bad(self.row_lb[i]) || bound_value_bad(self.row_ub[i]) {
                out.push(Diagnostic::NonFiniteRowBound(i));
            } else if inverted(self.row_lb[i], self.row_ub[i]) {
                out.push(Diagnostic::InvertedRowBounds(i));
            }
        }
        for j in 0..n {
            if bound_value_bad(self.col_lb[j]) || bound_value_bad(self.col_ub[j]) {
                out.push(Diagnostic::NonFiniteColBound(j));
            } else if inverted(self.col_lb[j], self.col_ub[j]) {
                out.push(Diagnostic::InvertedColBounds(j));
            }
        }
        out
    }

    /// Objective value of a primal point, in the problem's own sense.
    pub fn objective_value(&self, x: &[S]) -> S {
        let mut v = self.c0;
        for (j, &cj) in self.c.iter().enumerate() {
            v += cj * x[j];
        }
        v
    }
}

fn bound_value_bad<S: Real>(b: Bound<S>) -> bool {
    match b {
        Bound::Finite(v) => !v.is_finite(),
        _ => false,
    }
}

fn inverted<S: Real>(lb: Bound<S>, ub: Bound<S>) -> bool {
    match (lb, ub) {
        (Bound::Finite(l), Bound::Finite(u)) => l > u,
        // lower bound of +inf (or upper of -inf) is unsatisfiable
        (Bound::PosInf, _) | (_, Bound::NegInf) => true,
        _ => false,
    }
}
