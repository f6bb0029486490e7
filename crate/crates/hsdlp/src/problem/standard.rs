use thiserror::Error;

use crate::matrix::MatrixData;
use crate::problem::{Bound, GeneralLP, Sense, Solution};
use crate::scalar::Real;
use crate::sparse::CscMatrix;

/// Relative gap under which a two-sided bound counts as fixed.
pub(crate) fn fixed_gap_tol<S: Real>(l: S) -> S {
    S::from_f64(1e-12) * S::one().max(l.abs())
}

/// Upper-bound structure of the standard form: the index set `I` and the
/// bound values `u` (strictly positive by construction).
#[derive(Clone, Debug, Default)]
pub struct BoundedCols<S> {
    pub idx: Vec<usize>,
    pub val: Vec<S>,
}

impl<S: Real> BoundedCols<S> {
    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }
}

/// Internal standard form `min c'x + c0  s.t. Ax = b, x_I <= u, x >= 0`.
#[derive(Clone, Debug)]
pub struct StandardLP<S> {
    pub a: MatrixData<S>,
    pub b: Vec<S>,
    pub c: Vec<S>,
    pub c0: S,
    pub upper: BoundedCols<S>,
}

impl<S: Real> StandardLP<S> {
    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    pub fn nbounded(&self) -> usize {
        self.upper.len()
    }

    /// Plain standard-form problem without upper bounds.
    pub fn new(a: MatrixData<S>, b: Vec<S>, c: Vec<S>) -> Self {
        assert_eq!(a.nrows(), b.len());
        assert_eq!(a.ncols(), c.len());
        StandardLP {
            a,
            b,
            c,
            c0: S::zero(),
            upper: BoundedCols::default(),
        }
    }
}

/// How one original variable maps into standard-form columns.
#[derive(Clone, Debug, PartialEq)]
pub enum VarImage<S> {
    /// `x = x_std + shift`
    Shifted { col: usize, shift: S },
    /// `x = shift - x_std` (variable had only an upper bound)
    Negated { col: usize, shift: S },
    /// `x = x_std[pos] - x_std[neg]` (free variable split)
    Split { pos: usize, neg: usize },
    /// `x = value` (zero-gap bounds folded out)
    Fixed { value: S },
}

/// How one original row maps into the standard form.
#[derive(Clone, Debug, PartialEq)]
pub enum RowImage {
    /// Kept as equality row `idx`; `slack` is the added slack column and the
    /// sign of its coefficient, if the row was not an equality.
    Kept { idx: usize, slack: Option<(usize, i8)> },
    /// Free row, dropped; its dual is zero.
    Dropped,
}

/// Record of a [`to_standard_form`] conversion, sufficient to map points,
/// duals and rays in both directions.
#[derive(Clone, Debug)]
pub struct VariableMap<S> {
    pub maximize: bool,
    pub vars: Vec<VarImage<S>>,
    pub rows: Vec<RowImage>,
    pub n_std: usize,
    pub m_std: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CrushError {
    #[error("infeasible bounds on {0} {1}")]
    InfeasibleBounds(&'static str, usize),
    #[error("solution dimensions do not match the variable map")]
    MapMismatch,
}

/// Converts a valid [`GeneralLP`] into the internal standard form.
///
/// Maximization is turned into minimization by negating the objective;
/// ranged and inequality rows gain one slack column anchored at a finite
/// side; free variables are split into differences of two nonnegative
/// columns; finite lower bounds are shifted to zero and upper-bound-only
/// variables are negated first. Fixed variables are normally removed by
/// presolve before this runs; any that remain are substituted out here so
/// the `u > 0` invariant always holds.
pub fn to_standard_form<S: Real>(
    lp: &GeneralLP<S>,
) -> Result<(StandardLP<S>, VariableMap<S>), CrushError> {
    let m = lp.nrows();
    let n = lp.ncols();
    let maximize = lp.sense == Sense::Maximize;
    let obj_sign = if maximize { -S::one() } else { S::one() };

    let mut vars = Vec::with_capacity(n);
    let mut c_std: Vec<S> = Vec::new();
    let mut c0_std = obj_sign * lp.c0;
    let mut triplets: Vec<(usize, usize, S)> = Vec::new();
    let mut upper_idx = Vec::new();
    let mut upper_val = Vec::new();
    // activity contributed to each row by shifts and fixed values
    let mut row_shift = vec![S::zero(); m];

    for j in 0..n {
        let cj = obj_sign * lp.c[j];
        let (rows, vals) = lp.a.col(j);
        let entries = || rows.iter().copied().zip(vals.iter().copied());
        match (lp.col_lb[j], lp.col_ub[j]) {
            (Bound::Finite(l), Bound::Finite(u)) => {
                if l > u {
                    return Err(CrushError::InfeasibleBounds("column", j));
                }
                if u - l <= fixed_gap_tol(l) {
                    for (r, a) in entries() {
                        row_shift[r] += a * l;
                    }
                    c0_std += cj * l;
                    vars.push(VarImage::Fixed { value: l });
                } else {
                    let col = c_std.len();
                    c_std.push(cj);
                    for (r, a) in entries() {
                        triplets.push((r, col, a));
                        row_shift[r] += a * l;
                    }
                    c0_std += cj * l;
                    upper_idx.push(col);
                    upper_val.push(u - l);
                    vars.push(VarImage::Shifted { col, shift: l });
                }
            }
            (Bound::Finite(l), Bound::PosInf) => {
                let col = c_std.len();
                c_std.push(cj);
                for (r, a) in entries() {
                    triplets.push((r, col, a));
                    row_shift[r] += a * l;
                }
                c0_std += cj * l;
                vars.push(VarImage::Shifted { col, shift: l });
            }
            (Bound::NegInf, Bound::Finite(u)) => {
                // substitute x = u - x', x' >= 0
                let col = c_std.len();
                c_std.push(-cj);
                for (r, a) in entries() {
                    triplets.push((r, col, -a));
                    row_shift[r] += a * u;
                }
                c0_std += cj * u;
                vars.push(VarImage::Negated { col, shift: u });
            }
            (Bound::NegInf, Bound::PosInf) => {
                let pos = c_std.len();
                let neg = pos + 1;
                c_std.push(cj);
                c_std.push(-cj);
                for (r, a) in entries() {
                    triplets.push((r, pos, a));
                    triplets.push((r, neg, -a));
                }
                vars.push(VarImage::Split { pos, neg });
            }
            _ => return Err(CrushError::InfeasibleBounds("column", j)),
        }
    }

    let mut rows_map = Vec::with_capacity(m);
    let mut b_std: Vec<S> = Vec::new();
    for i in 0..m {
        let lb = lp.row_lb[i].add(-row_shift[i]);
        let ub = lp.row_ub[i].add(-row_shift[i]);
        match (lb, ub) {
            (Bound::Finite(l), Bound::Finite(u)) => {
                if l > u {
                    return Err(CrushError::InfeasibleBounds("row", i));
                }
                let idx = b_std.len();
                if u - l <= fixed_gap_tol(l) {
                    b_std.push(l);
                    rows_map.push(RowImage::Kept { idx, slack: None });
                } else {
                    // ranged row: anchor at the upper side, bounded slack
                    let col = c_std.len();
                    c_std.push(S::zero());
                    triplets.push((i, col, S::one()));
                    upper_idx.push(col);
                    upper_val.push(u - l);
                    b_std.push(u);
                    rows_map.push(RowImage::Kept {
                        idx,
                        slack: Some((col, 1)),
                    });
                }
            }
            (Bound::NegInf, Bound::Finite(u)) => {
                let idx = b_std.len();
                let col = c_std.len();
                c_std.push(S::zero());
                triplets.push((i, col, S::one()));
                b_std.push(u);
                rows_map.push(RowImage::Kept {
                    idx,
                    slack: Some((col, 1)),
                });
            }
            (Bound::Finite(l), Bound::PosInf) => {
                let idx = b_std.len();
                let col = c_std.len();
                c_std.push(S::zero());
                triplets.push((i, col, -S::one()));
                b_std.push(l);
                rows_map.push(RowImage::Kept {
                    idx,
                    slack: Some((col, -1)),
                });
            }
            (Bound::NegInf, Bound::PosInf) => {
                rows_map.push(RowImage::Dropped);
            }
            _ => return Err(CrushError::InfeasibleBounds("row", i)),
        }
    }

    // compact kept rows
    let m_std = b_std.len();
    let mut row_new_index = vec![usize::MAX; m];
    for (i, img) in rows_map.iter().enumerate() {
        if let RowImage::Kept { idx, .. } = img {
            row_new_index[i] = *idx;
        }
    }
    let n_std = c_std.len();
    let a_std = CscMatrix::from_triplets(
        m_std,
        n_std,
        triplets
            .into_iter()
            .filter(|&(r, _, _)| row_new_index[r] != usize::MAX)
            .map(|(r, c, v)| (row_new_index[r], c, v)),
    );

    let std = StandardLP {
        a: MatrixData::Csc(a_std),
        b: b_std,
        c: c_std,
        c0: c0_std,
        upper: BoundedCols {
            idx: upper_idx,
            val: upper_val,
        },
    };
    let map = VariableMap {
        maximize,
        vars,
        rows: rows_map,
        n_std,
        m_std,
    };
    Ok((std, map))
}

impl<S: Real> VariableMap<S> {
    /// Maps an original-space point to standard-form columns (slacks filled
    /// from row activities). Testing aid and the forward half of the
    /// crush/uncrush round trip.
    pub fn crush_point(&self, lp: &GeneralLP<S>, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.vars.len());
        let mut out = vec![S::zero(); self.n_std];
        for (j, img) in self.vars.iter().enumerate() {
            match *img {
                VarImage::Shifted { col, shift } => out[col] = x[j] - shift,
                VarImage::Negated { col, shift } => out[col] = shift - x[j],
                VarImage::Split { pos, neg } => {
                    if x[j] >= S::zero() {
                        out[pos] = x[j];
                    } else {
                        out[neg] = -x[j];
                    }
                }
                VarImage::Fixed { .. } => {}
            }
        }
        // slack values from row activities
        let mut activity = vec![S::zero(); lp.nrows()];
        lp.a.matvec(x, &mut activity);
        for (i, img) in self.rows.iter().enumerate() {
            if let RowImage::Kept {
                idx,
                slack: Some((col, sign)),
            } = *img
            {
                let anchor = if sign > 0 {
                    // row anchored at its upper side
                    match lp.row_ub[i] {
                        Bound::Finite(u) => u,
                        _ => unreachable!("positive slack implies finite upper row bound"),
                    }
                } else {
                    match lp.row_lb[i] {
                        Bound::Finite(l) => l,
                        _ => unreachable!("negative slack implies finite lower row bound"),
                    }
                };
                let s = (anchor - activity[i]) * S::from_f64(f64::from(sign));
                out[col] = s;
                let _ = idx;
            }
        }
        out
    }

    fn map_primal(&self, x_std: &[S], is_ray: bool) -> Vec<S> {
        let mut out = vec![S::zero(); self.vars.len()];
        for (j, img) in self.vars.iter().enumerate() {
            out[j] = match *img {
                VarImage::Shifted { col, shift } => {
                    if is_ray {
                        x_std[col]
                    } else {
                        x_std[col] + shift
                    }
                }
                VarImage::Negated { col, shift } => {
                    if is_ray {
                        -x_std[col]
                    } else {
                        shift - x_std[col]
                    }
                }
                VarImage::Split { pos, neg } => x_std[pos] - x_std[neg],
                VarImage::Fixed { value } => {
                    if is_ray {
                        S::zero()
                    } else {
                        value
                    }
                }
            };
        }
        out
    }

    fn map_duals(&self, y_std: &[S]) -> Vec<S> {
        let sign = if self.maximize { -S::one() } else { S::one() };
        self.rows
            .iter()
            .map(|img| match img {
                RowImage::Kept { idx, .. } => sign * y_std[*idx],
                RowImage::Dropped => S::zero(),
            })
            .collect()
    }
}

/// Maps a standard-form solution back to the original variable space.
///
/// Reduced costs are recomputed as `c - A^T y` on the original data; bound
/// duals are taken from the standard solution (with the lower/upper roles
/// swapped for negated variables). Rays map through the same linear part
/// with shifts ignored.
pub fn uncrush<S: Real>(
    lp: &GeneralLP<S>,
    map: &VariableMap<S>,
    sol: &Solution<S>,
) -> Result<Solution<S>, CrushError> {
    if sol.x.len() != map.n_std
        || sol.y.len() != map.m_std
        || map.vars.len() != lp.ncols()
        || map.rows.len() != lp.nrows()
    {
        return Err(CrushError::MapMismatch);
    }

    let x = map.map_primal(&sol.x, false);
    let y = map.map_duals(&sol.y);

    // net reduced costs on original data
    let mut aty = vec![S::zero(); lp.ncols()];
    lp.a.matvec_transpose(&y, &mut aty);
    let s: Vec<S> = (0..lp.ncols()).map(|j| lp.c[j] - aty[j]).collect();

    // upper-bound duals: standard z for shifted columns, standard s for
    // negated columns (the original upper bound became the standard lower)
    let z: Vec<S> = map
        .vars
        .iter()
        .map(|img| match *img {
            VarImage::Shifted { col, .. } => sol.z[col],
            VarImage::Negated { col, .. } => sol.s[col],
            _ => S::zero(),
        })
        .collect();

    let objective = lp.objective_value(&x);
    let primal_ray = sol
        .primal_ray
        .as_ref()
        .map(|r| map.map_primal(r, true));
    let dual_ray = sol.dual_ray.as_ref().map(|r| map.map_duals(r));

    Ok(Solution {
        status: sol.status,
        x,
        y,
        s,
        z,
        objective,
        primal_ray,
        dual_ray,
        stats: sol.stats.clone(),
    })
}
