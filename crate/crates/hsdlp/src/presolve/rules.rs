use std::collections::BTreeMap;

use crate::problem::{Bound, GeneralLP, Sense, Solution};
use crate::scalar::Real;
use crate::sparse::CscMatrix;

/// Relative tolerance for feasibility and activity comparisons.
fn feas_tol<S: Real>(scale: S) -> S {
    S::from_f64(1e-10) * S::one().max(scale.abs())
}

/// A bound counts as fixing its variable when the gap closes to this.
fn fixed_tol<S: Real>(l: S) -> S {
    S::from_f64(1e-12) * S::one().max(l.abs())
}

/// Coefficients smaller than this are not used as pivots for substitution.
fn pivot_tol<S: Real>() -> S {
    S::from_f64(1e-11)
}

/// Where a tightened variable bound came from, for Farkas ray assembly.
#[derive(Copy, Clone, Debug)]
enum BoundSource<S> {
    Original,
    Row { row: usize, coeff: S },
}

/// One elimination, with everything its undo needs.
#[derive(Clone, Debug)]
pub enum Reduction<S> {
    EmptyRow {
        row: usize,
    },
    RedundantRow {
        row: usize,
    },
    EmptyColumn {
        col: usize,
        value: S,
    },
    /// Variable pinned at `value`; `entries` snapshots the rows active at
    /// reduction time (their duals determine the reduced cost).
    FixedVariable {
        col: usize,
        value: S,
        cost: S,
        entries: Vec<(usize, S)>,
    },
    /// Row with a single nonzero turned into bounds on its variable.
    RowSingleton {
        row: usize,
        col: usize,
        coeff: S,
        cost: S,
        /// Variable bounds before tightening.
        old_lb: Bound<S>,
        old_ub: Bound<S>,
        /// Bounds implied by the row alone.
        implied_lb: Bound<S>,
        implied_ub: Bound<S>,
        /// Column entries in other rows active at reduction time.
        entries: Vec<(usize, S)>,
    },
    /// Row whose activity interval pinched against one of its bounds,
    /// fixing every variable it touches.
    ForcingRow {
        row: usize,
        /// True if activity was forced to the row's upper bound.
        at_upper: bool,
        /// `(col, coeff, value, cost, snapshot of other-row entries)`.
        fixed: Vec<(usize, S, S, S, Vec<(usize, S)>)>,
    },
    /// Free (or implied-free) column with a single nonzero, substituted out
    /// together with its row.
    FreeColumnSingleton {
        col: usize,
        row: usize,
        coeff: S,
        /// Row right-hand side used for the substitution.
        rhs: S,
        /// Pinned dual of the row: `cost / coeff`.
        y_pinned: S,
        /// Other columns of the row at reduction time.
        row_entries: Vec<(usize, S)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PresolveStatus<S> {
    InProgress,
    ReducedToEmpty,
    Infeasible { ray: Vec<S> },
    Unbounded { ray: Vec<S> },
}

/// Working copy of the problem plus the postsolve stack.
///
/// Entries live in per-row and per-column ordered maps so that singleton
/// detection and eliminations stay deterministic; eliminations only ever
/// remove entries (the no-fill-in guarantee is structural).
pub struct PresolveState<S> {
    m: usize,
    n: usize,
    maximize: bool,
    rows: Vec<BTreeMap<usize, S>>,
    cols: Vec<BTreeMap<usize, S>>,
    row_active: Vec<bool>,
    col_active: Vec<bool>,
    row_lb: Vec<Bound<S>>,
    row_ub: Vec<Bound<S>>,
    col_lb: Vec<Bound<S>>,
    col_ub: Vec<Bound<S>>,
    lb_source: Vec<BoundSource<S>>,
    ub_source: Vec<BoundSource<S>>,
    cost: Vec<S>,
    c0: S,
    nnz: usize,
    stack: Vec<Reduction<S>>,
    status: PresolveStatus<S>,
    row_names: Vec<String>,
    col_names: Vec<String>,
    /// Original indices of surviving rows/columns, filled by
    /// `extract_reduced`.
    final_rows: Vec<usize>,
    final_cols: Vec<usize>,
    scaling: Option<super::ScalingFactors<S>>,
}

impl<S: Real> PresolveState<S> {
    /// Builds the working copy; maximization is normalized to minimization
    /// here and undone in postsolve.
    pub fn new(lp: &GeneralLP<S>) -> Self {
        let m = lp.nrows();
        let n = lp.ncols();
        let maximize = lp.sense == Sense::Maximize;
        let sign = if maximize { -S::one() } else { S::one() };
        let mut rows: Vec<BTreeMap<usize, S>> = vec![BTreeMap::new(); m];
        let mut cols: Vec<BTreeMap<usize, S>> = vec![BTreeMap::new(); n];
        let mut nnz = 0usize;
        for (i, j, v) in lp.a.iter() {
            if v != S::zero() {
                rows[i].insert(j, v);
                cols[j].insert(i, v);
                nnz += 1;
            }
        }
        PresolveState {
            m,
            n,
            maximize,
            rows,
            cols,
            row_active: vec![true; m],
            col_active: vec![true; n],
            row_lb: lp.row_lb.clone(),
            row_ub: lp.row_ub.clone(),
            col_lb: lp.col_lb.clone(),
            col_ub: lp.col_ub.clone(),
            lb_source: vec![BoundSource::Original; n],
            ub_source: vec![BoundSource::Original; n],
            cost: lp.c.iter().map(|&c| sign * c).collect(),
            c0: sign * lp.c0,
            nnz,
            stack: Vec::new(),
            status: PresolveStatus::InProgress,
            row_names: lp.row_names.clone(),
            col_names: lp.col_names.clone(),
            final_rows: Vec::new(),
            final_cols: Vec::new(),
            scaling: None,
        }
    }

    pub fn status(&self) -> &PresolveStatus<S> {
        &self.status
    }

    pub fn stack_len(&self) -> usize {
        self.stack.len()
    }

    /// Active nonzeros of the working matrix (never grows).
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub(crate) fn set_scaling(&mut self, factors: super::ScalingFactors<S>) {
        self.scaling = Some(factors);
    }

    fn in_progress(&self) -> bool {
        self.status == PresolveStatus::InProgress
    }

    fn declare_infeasible(&mut self, ray: Vec<S>) {
        if self.in_progress() {
            self.status = PresolveStatus::Infeasible { ray };
        }
    }

    fn declare_unbounded(&mut self, col: usize, direction: S) {
        if self.in_progress() {
            let mut ray = vec![S::zero(); self.n];
            ray[col] = direction;
            self.status = PresolveStatus::Unbounded { ray };
        }
    }

    /// Farkas ray for a conflict between the two bound sides of a column,
    /// possibly involving the rows that produced those bounds.
    fn bound_conflict_ray(&self, col: usize) -> Vec<S> {
        let mut ray = vec![S::zero(); self.m];
        // x >= lb scaled by 1/|a| per unit of the source row's relevant side
        if let BoundSource::Row { row, coeff } = self.lb_source[col] {
            ray[row] = coeff.recip();
        }
        if let BoundSource::Row { row, coeff } = self.ub_source[col] {
            ray[row] = -coeff.recip();
        }
        ray
    }

    fn remove_entry(&mut self, row: usize, col: usize) {
        if self.rows[row].remove(&col).is_some() {
            self.cols[col].remove(&row);
            self.nnz -= 1;
        }
    }

    /// Deactivates a row, detaching its entries from the column maps.
    fn drop_row(&mut self, row: usize) {
        self.row_active[row] = false;
        let entries: Vec<usize> = self.rows[row].keys().copied().collect();
        for col in entries {
            self.remove_entry(row, col);
        }
    }

    /// Pins a variable at `value`: substitutes it into every active row's
    /// bounds and removes the column.
    fn substitute_fixed(&mut self, col: usize, value: S) -> Vec<(usize, S)> {
        let entries: Vec<(usize, S)> = self.cols[col].iter().map(|(&r, &a)| (r, a)).collect();
        for &(row, coeff) in &entries {
            let shift = -coeff * value;
            self.row_lb[row] = self.row_lb[row].add(shift);
            self.row_ub[row] = self.row_ub[row].add(shift);
            self.remove_entry(row, col);
        }
        self.col_active[col] = false;
        self.c0 += self.cost[col] * value;
        entries
    }

    /// Bound consistency check over active columns (and rows).
    /// Returns false when an inversion proves infeasibility.
    pub fn check_bounds(&mut self) -> bool {
        if !self.in_progress() {
            return false;
        }
        for j in 0..self.n {
            if !self.col_active[j] {
                continue;
            }
            if let (Bound::Finite(l), Bound::Finite(u)) = (self.col_lb[j], self.col_ub[j]) {
                if l > u + feas_tol(l) {
                    let ray = self.bound_conflict_ray(j);
                    self.declare_infeasible(ray);
                    return false;
                }
            }
        }
        for i in 0..self.m {
            if !self.row_active[i] {
                continue;
            }
            if let (Bound::Finite(l), Bound::Finite(u)) = (self.row_lb[i], self.row_ub[i]) {
                if l > u + feas_tol(l) {
                    let mut ray = vec![S::zero(); self.m];
                    ray[i] = S::one();
                    self.declare_infeasible(ray);
                    return false;
                }
            }
        }
        true
    }

    /// Removes rows with no active entries: redundant if `0` lies within
    /// their bounds, infeasible otherwise.
    pub fn reduce_empty_rows(&mut self) -> usize {
        if !self.in_progress() {
            return 0;
        }
        let mut count = 0;
        for i in 0..self.m {
            if !self.row_active[i] || !self.rows[i].is_empty() {
                continue;
            }
            let zero_ok = self.row_lb[i].le(Bound::Finite(feas_tol(S::zero())))
                && Bound::Finite(-feas_tol(S::zero())).le(self.row_ub[i]);
            if !zero_ok {
                let mut ray = vec![S::zero(); self.m];
                // certifies via whichever side excludes zero
                ray[i] = match self.row_lb[i] {
                    Bound::Finite(l) if l > S::zero() => S::one(),
                    _ => -S::one(),
                };
                self.declare_infeasible(ray);
                return count;
            }
            self.row_active[i] = false;
            self.stack.push(Reduction::EmptyRow { row: i });
            count += 1;
        }
        count
    }

    /// Fixes columns with no active entries at the bound favored by their
    /// cost; an infinite favored bound makes the problem unbounded.
    pub fn reduce_empty_columns(&mut self) -> usize {
        if !self.in_progress() {
            return 0;
        }
        let mut count = 0;
        let tol = feas_tol(S::zero());
        for j in 0..self.n {
            if !self.col_active[j] || !self.cols[j].is_empty() {
                continue;
            }
            let c = self.cost[j];
            let value = if c > tol {
                match self.col_lb[j] {
                    Bound::Finite(l) => l,
                    _ => {
                        self.declare_unbounded(j, -S::one());
                        return count;
                    }
                }
            } else if c < -tol {
                match self.col_ub[j] {
                    Bound::Finite(u) => u,
                    _ => {
                        self.declare_unbounded(j, S::one());
                        return count;
                    }
                }
            } else {
                // cost-free: any value within bounds
                match (self.col_lb[j], self.col_ub[j]) {
                    (Bound::Finite(l), _) if l > S::zero() => l,
                    (_, Bound::Finite(u)) if u < S::zero() => u,
                    _ => S::zero(),
                }
            };
            self.col_active[j] = false;
            self.c0 += c * value;
            self.stack.push(Reduction::EmptyColumn { col: j, value });
            count += 1;
        }
        count
    }

    /// Converts rows with a single nonzero into variable bounds.
    pub fn reduce_row_singletons(&mut self) -> usize {
        if !self.in_progress() {
            return 0;
        }
        let mut count = 0;
        loop {
            let mut progressed = false;
            for i in 0..self.m {
                if !self.in_progress() {
                    return count;
                }
                if !self.row_active[i] || self.rows[i].len() != 1 {
                    continue;
                }
                let (&col, &coeff) = self.rows[i].iter().next().unwrap();
                if coeff.abs() < pivot_tol() {
                    continue;
                }
                // implied bounds l/a <= x <= u/a, sides swapped for a < 0
                let (implied_lb, implied_ub) = if coeff > S::zero() {
                    (
                        self.row_lb[i].scale(coeff.recip()),
                        self.row_ub[i].scale(coeff.recip()),
                    )
                } else {
                    (
                        self.row_ub[i].scale(coeff.recip()),
                        self.row_lb[i].scale(coeff.recip()),
                    )
                };
                let old_lb = self.col_lb[col];
                let old_ub = self.col_ub[col];

                // intersect, remembering which row certifies each side
                let new_lb = old_lb.ext_max(implied_lb);
                let new_ub = old_ub.ext_min(implied_ub);
                if implied_lb.is_finite() && !implied_lb.le(old_lb) {
                    self.lb_source[col] = BoundSource::Row { row: i, coeff };
                }
                if implied_ub.is_finite() && !old_ub.le(implied_ub) {
                    self.ub_source[col] = BoundSource::Row { row: i, coeff };
                }

                if let (Bound::Finite(l), Bound::Finite(u)) = (new_lb, new_ub) {
                    if l > u + feas_tol(l) {
                        self.col_lb[col] = new_lb;
                        self.col_ub[col] = new_ub;
                        let ray = self.bound_conflict_ray(col);
                        self.declare_infeasible(ray);
                        return count;
                    }
                }
                self.col_lb[col] = new_lb;
                self.col_ub[col] = new_ub;

                let entries_after: Vec<(usize, S)> = self.cols[col]
                    .iter()
                    .filter(|(&r, _)| r != i)
                    .map(|(&r, &a)| (r, a))
                    .collect();
                self.drop_row(i);
                self.stack.push(Reduction::RowSingleton {
                    row: i,
                    col,
                    coeff,
                    cost: self.cost[col],
                    old_lb,
                    old_ub,
                    implied_lb,
                    implied_ub,
                    entries: entries_after,
                });
                count += 1;
                progressed = true;
            }
            if !progressed {
                break;
            }
        }
        count
    }

    /// Substitutes out variables whose bounds have closed.
    pub fn reduce_fixed_variables(&mut self) -> usize {
        if !self.in_progress() {
            return 0;
        }
        let mut count = 0;
        for j in 0..self.n {
            if !self.col_active[j] {
                continue;
            }
            if let (Bound::Finite(l), Bound::Finite(u)) = (self.col_lb[j], self.col_ub[j]) {
                if u - l <= fixed_tol(l) {
                    let cost = self.cost[j];
                    let entries = self.substitute_fixed(j, l);
                    self.stack.push(Reduction::FixedVariable {
                        col: j,
                        value: l,
                        cost,
                        entries,
                    });
                    count += 1;
                }
            }
        }
        count
    }

    /// Activity interval `[inf, sup]` of an active row from variable bounds.
    fn row_activity(&self, row: usize) -> (Bound<S>, Bound<S>) {
        let mut inf = Bound::Finite(S::zero());
        let mut sup = Bound::Finite(S::zero());
        for (&j, &a) in &self.rows[row] {
            let (lo, hi) = if a > S::zero() {
                (self.col_lb[j].scale(a), self.col_ub[j].scale(a))
            } else {
                (self.col_ub[j].scale(a), self.col_lb[j].scale(a))
            };
            inf = inf.ext_add(lo);
            sup = sup.ext_add(hi);
        }
        (inf, sup)
    }

    /// Removes rows whose activity interval proves them redundant, forcing
    /// or infeasible.
    pub fn reduce_forcing_dominated_rows(&mut self) -> usize {
        if !self.in_progress() {
            return 0;
        }
        let mut count = 0;
        for i in 0..self.m {
            if !self.in_progress() {
                return count;
            }
            if !self.row_active[i] {
                continue;
            }
            let (inf, sup) = self.row_activity(i);
            let lb = self.row_lb[i];
            let ub = self.row_ub[i];

            // disjoint activity and bounds: infeasible
            let infeasible_low = match (sup, lb) {
                (Bound::Finite(s), Bound::Finite(l)) => s < l - feas_tol(l),
                (Bound::NegInf, Bound::Finite(_)) => true,
                _ => false,
            };
            let infeasible_high = match (inf, ub) {
                (Bound::Finite(f), Bound::Finite(u)) => f > u + feas_tol(u),
                (Bound::PosInf, Bound::Finite(_)) => true,
                _ => false,
            };
            if infeasible_low || infeasible_high {
                let mut ray = vec![S::zero(); self.m];
                ray[i] = if infeasible_low { S::one() } else { -S::one() };
                self.declare_infeasible(ray);
                return count;
            }

            // forcing: the activity interval pinches against a row bound
            let forcing_upper = match (inf, ub) {
                (Bound::Finite(f), Bound::Finite(u)) => (f - u).abs() <= feas_tol(u),
                _ => false,
            };
            let forcing_lower = match (sup, lb) {
                (Bound::Finite(s), Bound::Finite(l)) => (s - l).abs() <= feas_tol(l),
                _ => false,
            };
            if forcing_upper || forcing_lower {
                self.apply_forcing_row(i, forcing_upper);
                count += 1;
                continue;
            }

            // redundant: activity always within bounds
            if lb.le(inf) && sup.le(ub) {
                self.drop_row(i);
                self.stack.push(Reduction::RedundantRow { row: i });
                count += 1;
            }
        }
        count
    }

    /// Fixes every variable of a forcing row at the bound achieving the
    /// pinched side, then removes the row.
    fn apply_forcing_row(&mut self, row: usize, at_upper: bool) {
        let members: Vec<(usize, S)> = self.rows[row].iter().map(|(&j, &a)| (j, a)).collect();
        // at_upper: activity minimum equals the row's upper bound, so every
        // variable sits where its term is smallest
        let mut fixed = Vec::with_capacity(members.len());
        for &(j, a) in &members {
            let at_lower = (a > S::zero()) == at_upper;
            let value = if at_lower {
                match self.col_lb[j] {
                    Bound::Finite(l) => l,
                    _ => unreachable!("finite activity bound requires finite variable bound"),
                }
            } else {
                match self.col_ub[j] {
                    Bound::Finite(u) => u,
                    _ => unreachable!("finite activity bound requires finite variable bound"),
                }
            };
            let snapshot: Vec<(usize, S)> = self.cols[j]
                .iter()
                .filter(|(&r, _)| r != row)
                .map(|(&r, &a2)| (r, a2))
                .collect();
            fixed.push((j, a, value, self.cost[j], snapshot));
        }
        self.drop_row(row);
        for &(j, _, value, _, _) in &fixed {
            self.substitute_fixed(j, value);
        }
        self.stack.push(Reduction::ForcingRow {
            row,
            at_upper,
            fixed,
        });
    }

    /// Substitutes out free (or implied-free) column singletons together
    /// with their row; the row's dual is pinned at `c_j / a_ij`.
    pub fn reduce_free_column_singletons(&mut self) -> usize {
        if !self.in_progress() {
            return 0;
        }
        let mut count = 0;
        for j in 0..self.n {
            if !self.col_active[j] || self.cols[j].len() != 1 {
                continue;
            }
            let (&row, &coeff) = self.cols[j].iter().next().unwrap();
            if coeff.abs() < pivot_tol() {
                continue;
            }

            let is_free =
                !self.col_lb[j].is_finite() && !self.col_ub[j].is_finite();
            if !is_free && !self.implied_free(j, row, coeff) {
                continue;
            }

            // pin the dual and pick the row side it makes active
            let y_pinned = self.cost[j] / coeff;
            let tol = feas_tol(y_pinned);
            let rhs = if let (Bound::Finite(l), Bound::Finite(u)) = (self.row_lb[row], self.row_ub[row]) {
                if u - l <= fixed_tol(l) {
                    l
                } else if y_pinned > tol {
                    l
                } else if y_pinned < -tol {
                    u
                } else {
                    l
                }
            } else if y_pinned > tol {
                match self.row_lb[row] {
                    Bound::Finite(l) => l,
                    _ => continue, // needed side is infinite: rule not applicable
                }
            } else if y_pinned < -tol {
                match self.row_ub[row] {
                    Bound::Finite(u) => u,
                    _ => continue,
                }
            } else {
                match (self.row_lb[row], self.row_ub[row]) {
                    (Bound::Finite(l), _) => l,
                    (_, Bound::Finite(u)) => u,
                    _ => continue, // free row; the forcing pass removes it
                }
            };

            let row_entries: Vec<(usize, S)> = self.rows[row]
                .iter()
                .filter(|(&jj, _)| jj != j)
                .map(|(&jj, &a)| (jj, a))
                .collect();
            // substitute into the objective: x_j = (rhs - sum a_k x_k)/a_ij
            self.c0 += self.cost[j] * rhs / coeff;
            for &(k, a) in &row_entries {
                let adj = self.cost[j] * a / coeff;
                self.cost[k] -= adj;
            }
            self.drop_row(row);
            self.col_active[j] = false;
            self.stack.push(Reduction::FreeColumnSingleton {
                col: j,
                row,
                coeff,
                rhs,
                y_pinned,
                row_entries,
            });
            count += 1;
        }
        count
    }

    /// One-row implied-free test: the range the row forces on the variable
    /// lies inside its own bounds.
    fn implied_free(&self, col: usize, row: usize, coeff: S) -> bool {
        // activity of the row without this column
        let mut inf = Bound::Finite(S::zero());
        let mut sup = Bound::Finite(S::zero());
        for (&j, &a) in &self.rows[row] {
            if j == col {
                continue;
            }
            let (lo, hi) = if a > S::zero() {
                (self.col_lb[j].scale(a), self.col_ub[j].scale(a))
            } else {
                (self.col_ub[j].scale(a), self.col_lb[j].scale(a))
            };
            inf = inf.ext_add(lo);
            sup = sup.ext_add(hi);
        }
        // x = (b - others)/a with b in [l, u]
        let hi_num = match (self.row_ub[row], inf) {
            (Bound::Finite(u), Bound::Finite(f)) => Bound::Finite(u - f),
            (Bound::PosInf, b) if b.is_finite() || b == Bound::NegInf => Bound::PosInf,
            _ => return false,
        };
        let lo_num = match (self.row_lb[row], sup) {
            (Bound::Finite(l), Bound::Finite(s)) => Bound::Finite(l - s),
            (Bound::NegInf, b) if b.is_finite() || b == Bound::PosInf => Bound::NegInf,
            _ => return false,
        };
        let (implied_lb, implied_ub) = if coeff > S::zero() {
            (lo_num.scale(coeff.recip()), hi_num.scale(coeff.recip()))
        } else {
            (hi_num.scale(coeff.recip()), lo_num.scale(coeff.recip()))
        };
        let lb_ok = match (self.col_lb[col], implied_lb) {
            (Bound::NegInf, _) => true,
            (Bound::Finite(l), Bound::Finite(il)) => il >= l - feas_tol(l),
            _ => false,
        };
        let ub_ok = match (self.col_ub[col], implied_ub) {
            (Bound::PosInf, _) => true,
            (Bound::Finite(u), Bound::Finite(iu)) => iu <= u + feas_tol(u),
            _ => false,
        };
        lb_ok && ub_ok
    }

    /// Weak duality bound per row: the interval its dual can live in, from
    /// which side of the row is finite.
    fn dual_interval(&self, row: usize) -> (Bound<S>, Bound<S>) {
        let lo = if self.row_ub[row].is_finite() {
            Bound::NegInf
        } else {
            Bound::Finite(S::zero())
        };
        let hi = if self.row_lb[row].is_finite() {
            Bound::PosInf
        } else {
            Bound::Finite(S::zero())
        };
        (lo, hi)
    }

    /// Fixes columns whose reduced cost has a guaranteed sign under the
    /// weak per-row dual bounds.
    pub fn reduce_dominated_columns(&mut self) -> usize {
        if !self.in_progress() {
            return 0;
        }
        let mut count = 0;
        for j in 0..self.n {
            if !self.in_progress() {
                return count;
            }
            if !self.col_active[j] || self.cols[j].is_empty() {
                continue;
            }
            // smallest and largest possible reduced cost c_j - sum a_ij y_i
            let mut smin = Bound::Finite(self.cost[j]);
            let mut smax = Bound::Finite(self.cost[j]);
            for (&i, &a) in &self.cols[j] {
                let (ylo, yhi) = self.dual_interval(i);
                let (term_min, term_max) = if a > S::zero() {
                    (yhi.scale(a).neg(), ylo.scale(a).neg())
                } else {
                    (ylo.scale(a).neg(), yhi.scale(a).neg())
                };
                smin = smin.ext_add(term_min);
                smax = smax.ext_add(term_max);
            }
            let strict = feas_tol(self.cost[j]);
            let dominated_low = matches!(smin, Bound::Finite(v) if v > strict);
            let dominated_high = matches!(smax, Bound::Finite(v) if v < -strict);
            if dominated_low {
                // reduced cost always positive: optimal at the lower bound
                match self.col_lb[j] {
                    Bound::Finite(l) => {
                        let cost = self.cost[j];
                        let entries = self.substitute_fixed(j, l);
                        self.stack.push(Reduction::FixedVariable {
                            col: j,
                            value: l,
                            cost,
                            entries,
                        });
                        count += 1;
                    }
                    _ => {
                        self.declare_unbounded(j, -S::one());
                        return count;
                    }
                }
            } else if dominated_high {
                match self.col_ub[j] {
                    Bound::Finite(u) => {
                        let cost = self.cost[j];
                        let entries = self.substitute_fixed(j, u);
                        self.stack.push(Reduction::FixedVariable {
                            col: j,
                            value: u,
                            cost,
                            entries,
                        });
                        count += 1;
                    }
                    _ => {
                        self.declare_unbounded(j, S::one());
                        return count;
                    }
                }
            }
        }
        count
    }

    /// The full reduction loop in its fixed order.
    pub fn run_loop(&mut self) {
        self.reduce_empty_rows();
        self.reduce_empty_columns();
        loop {
            if !self.in_progress() {
                break;
            }
            let mut changed = 0;
            if !self.check_bounds() {
                break;
            }
            changed += self.reduce_empty_columns();
            changed += self.reduce_row_singletons();
            changed += self.reduce_fixed_variables();
            changed += self.reduce_row_singletons();
            changed += self.reduce_forcing_dominated_rows();
            changed += self.reduce_row_singletons();
            changed += self.reduce_free_column_singletons();
            changed += self.reduce_row_singletons();
            changed += self.reduce_dominated_columns();
            if !self.in_progress() || changed == 0 {
                break;
            }
        }
        if self.in_progress() {
            let any_row = self.row_active.iter().any(|&a| a);
            let any_col = self.col_active.iter().any(|&a| a);
            if !any_row && !any_col {
                self.status = PresolveStatus::ReducedToEmpty;
            }
        }
    }

    /// Builds the reduced problem from the surviving rows and columns and
    /// records the index maps for postsolve.
    pub fn extract_reduced(&mut self) -> GeneralLP<S> {
        self.final_rows = (0..self.m).filter(|&i| self.row_active[i]).collect();
        self.final_cols = (0..self.n).filter(|&j| self.col_active[j]).collect();
        let row_pos: BTreeMap<usize, usize> = self
            .final_rows
            .iter()
            .enumerate()
            .map(|(k, &i)| (i, k))
            .collect();
        let mut triplets = Vec::with_capacity(self.nnz);
        for (new_j, &j) in self.final_cols.iter().enumerate() {
            for (&i, &a) in &self.cols[j] {
                triplets.push((row_pos[&i], new_j, a));
            }
        }
        let a = CscMatrix::from_triplets(self.final_rows.len(), self.final_cols.len(), triplets);
        GeneralLP {
            sense: Sense::Minimize,
            c: self.final_cols.iter().map(|&j| self.cost[j]).collect(),
            c0: self.c0,
            a,
            row_lb: self.final_rows.iter().map(|&i| self.row_lb[i]).collect(),
            row_ub: self.final_rows.iter().map(|&i| self.row_ub[i]).collect(),
            col_lb: self.final_cols.iter().map(|&j| self.col_lb[j]).collect(),
            col_ub: self.final_cols.iter().map(|&j| self.col_ub[j]).collect(),
            row_names: self
                .final_rows
                .iter()
                .map(|&i| self.row_names[i].clone())
                .collect(),
            col_names: self
                .final_cols
                .iter()
                .map(|&j| self.col_names[j].clone())
                .collect(),
        }
    }

    /// Maps a solution of the reduced problem back to the original space:
    /// unscale, scatter, pop the stack in reverse, then recompute reduced
    /// costs from the original data.
    pub fn postsolve(&self, original: &GeneralLP<S>, reduced: &Solution<S>) -> Solution<S> {
        // 1. unscale
        let (mut red_x, mut red_y) = (reduced.x.clone(), reduced.y.clone());
        if let Some(f) = &self.scaling {
            f.unscale_point(&mut red_x, &mut red_y);
        }

        // 2. scatter into full index space
        let mut x = vec![S::zero(); self.n];
        let mut y = vec![S::zero(); self.m];
        for (k, &j) in self.final_cols.iter().enumerate() {
            x[j] = red_x[k];
        }
        for (k, &i) in self.final_rows.iter().enumerate() {
            y[i] = red_y[k];
        }

        // 3. pop the stack
        for record in self.stack.iter().rev() {
            match record {
                Reduction::EmptyRow { row } | Reduction::RedundantRow { row } => {
                    y[*row] = S::zero();
                }
                Reduction::EmptyColumn { col, value } => {
                    x[*col] = *value;
                }
                Reduction::FixedVariable { col, value, .. } => {
                    x[*col] = *value;
                }
                Reduction::RowSingleton {
                    row,
                    col,
                    coeff,
                    cost,
                    old_lb,
                    old_ub,
                    implied_lb,
                    implied_ub,
                    entries,
                } => {
                    let mut rest = *cost;
                    for &(r, a) in entries {
                        rest -= a * y[r];
                    }
                    let xv = x[*col];
                    // transfer the multiplier to the row only if the binding
                    // bound came from this row
                    let from_row_lower = binds(xv, *implied_lb) && tighter_low(*implied_lb, *old_lb);
                    let from_row_upper = binds(xv, *implied_ub) && tighter_high(*implied_ub, *old_ub);
                    y[*row] = if from_row_lower || from_row_upper {
                        rest / *coeff
                    } else {
                        S::zero()
                    };
                }
                Reduction::ForcingRow {
                    row,
                    at_upper,
                    fixed,
                } => {
                    // choose the row dual that keeps every fixed column
                    // dual-feasible: all the constraints are one-sided
                    let mut y_row = S::zero();
                    for (col, coeff, value, cost, snapshot) in fixed {
                        x[*col] = *value;
                        let mut rest = *cost;
                        for &(r, a) in snapshot {
                            rest -= a * y[r];
                        }
                        let ratio = rest / *coeff;
                        if *at_upper {
                            // row active at its upper bound: y <= 0
                            y_row = y_row.min(ratio);
                        } else {
                            y_row = y_row.max(ratio);
                        }
                    }
                    y[*row] = y_row;
                }
                Reduction::FreeColumnSingleton {
                    col,
                    row,
                    coeff,
                    rhs,
                    y_pinned,
                    row_entries,
                } => {
                    let mut others = S::zero();
                    for &(k, a) in row_entries {
                        others += a * x[k];
                    }
                    x[*col] = (*rhs - others) / *coeff;
                    y[*row] = *y_pinned;
                }
            }
        }

        // 4. reduced costs from original data, sense restored
        let sense = if self.maximize { -S::one() } else { S::one() };
        let mut aty = vec![S::zero(); self.n];
        original.a.matvec_transpose(&y, &mut aty);
        // y was built for the minimized form; report duals in the problem's
        // own sense
        let y_out: Vec<S> = y.iter().map(|&v| sense * v).collect();
        let mut s = vec![S::zero(); self.n];
        let mut z = vec![S::zero(); self.n];
        for j in 0..self.n {
            // s = c - A'y in the original sense
            s[j] = original.c[j] - sense * aty[j];
            let s_min_sense = sense * s[j];
            if s_min_sense < S::zero() {
                z[j] = -s_min_sense;
            }
        }

        // 5. rays, scattered best-effort (exact when no reduction fired)
        let primal_ray = reduced.primal_ray.as_ref().map(|r| {
            let mut full = vec![S::zero(); self.n];
            let mut r = r.clone();
            if let Some(f) = &self.scaling {
                f.unscale_primal_ray(&mut r);
            }
            for (k, &j) in self.final_cols.iter().enumerate() {
                full[j] = r[k];
            }
            full
        });
        let dual_ray = reduced.dual_ray.as_ref().map(|r| {
            let mut full = vec![S::zero(); self.m];
            let mut r = r.clone();
            if let Some(f) = &self.scaling {
                f.unscale_dual_ray(&mut r);
            }
            for (k, &i) in self.final_rows.iter().enumerate() {
                full[i] = sense * r[k];
            }
            full
        });

        let objective = original.objective_value(&x);
        Solution {
            status: reduced.status,
            x,
            y: y_out,
            s,
            z,
            objective,
            primal_ray,
            dual_ray,
            stats: reduced.stats.clone(),
        }
    }
}

/// `x` sits at the finite bound `b` (within tolerance).
fn binds<S: Real>(x: S, b: Bound<S>) -> bool {
    match b {
        Bound::Finite(v) => (x - v).abs() <= S::from_f64(1e-7) * S::one().max(v.abs()),
        _ => false,
    }
}

/// The implied lower bound strictly tightens the old one.
fn tighter_low<S: Real>(implied: Bound<S>, old: Bound<S>) -> bool {
    match (implied, old) {
        (Bound::Finite(i), Bound::Finite(o)) => i > o + feas_tol(o),
        (Bound::Finite(_), Bound::NegInf) => true,
        _ => false,
    }
}

fn tighter_high<S: Real>(implied: Bound<S>, old: Bound<S>) -> bool {
    match (implied, old) {
        (Bound::Finite(i), Bound::Finite(o)) => i < o - feas_tol(o),
        (Bound::Finite(_), Bound::PosInf) => true,
        _ => false,
    }
}
