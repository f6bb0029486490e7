use super::*;
use crate::problem::{Bound, GeneralLP, Sense};
use crate::sparse::CscMatrix;

fn lp(
    m: usize,
    n: usize,
    entries: Vec<(usize, usize, f64)>,
    c: Vec<f64>,
) -> GeneralLP<f64> {
    GeneralLP::new(CscMatrix::from_triplets(m, n, entries), c)
}

#[test]
fn row_singleton_tightens_and_removes() {
    // row 3x = [6, 9] with x in [0, 10] -> x in [2, 3], row removed
    let mut p = lp(1, 1, vec![(0, 0, 3.0)], vec![1.0]);
    p.row_lb[0] = Bound::Finite(6.0);
    p.row_ub[0] = Bound::Finite(9.0);
    p.col_ub[0] = Bound::Finite(10.0);
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_row_singletons(), 1);
    let reduced = st.extract_reduced();
    assert_eq!(reduced.nrows(), 0);
    assert_eq!(reduced.col_lb[0], Bound::Finite(2.0));
    assert_eq!(reduced.col_ub[0], Bound::Finite(3.0));
}

#[test]
fn row_singleton_negative_coefficient_swaps_sides() {
    // row -x = [1, 1] with x >= 0 -> implied x = -1: infeasible
    let mut p = lp(1, 1, vec![(0, 0, -1.0)], vec![1.0]);
    p.row_lb[0] = Bound::Finite(1.0);
    p.row_ub[0] = Bound::Finite(1.0);
    let mut st = PresolveState::new(&p);
    st.reduce_row_singletons();
    assert!(matches!(st.status(), PresolveStatus::Infeasible { .. }));
}

#[test]
fn no_singletons_means_no_change() {
    let mut p = lp(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)], vec![1.0, 1.0]);
    p.row_lb[0] = Bound::Finite(1.0);
    p.row_ub[0] = Bound::Finite(1.0);
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_row_singletons(), 0);
    assert_eq!(st.nnz(), 2);
}

#[test]
fn singleton_equality_fixes_variable() {
    // row 2x = 6 -> x fixed at 3 (singleton then fixed-variable rule)
    let mut p = lp(1, 2, vec![(0, 0, 2.0), (0, 1, 1.0)], vec![5.0, 1.0]);
    p.row_lb[0] = Bound::Finite(6.0);
    p.row_ub[0] = Bound::Finite(6.0);
    // second variable only exists so the problem stays nonempty
    p.col_ub[1] = Bound::Finite(1.0);
    // make row a singleton by removing the second entry: use two rows instead
    let mut p = lp(2, 2, vec![(0, 0, 2.0), (1, 1, 1.0)], vec![5.0, 1.0]);
    p.row_lb[0] = Bound::Finite(6.0);
    p.row_ub[0] = Bound::Finite(6.0);
    p.row_lb[1] = Bound::Finite(0.0);
    p.row_ub[1] = Bound::Finite(1.0);
    let mut st = PresolveState::new(&p);
    st.reduce_row_singletons();
    assert_eq!(st.reduce_fixed_variables(), 1);
    let reduced = st.extract_reduced();
    // x eliminated; objective constant picked up 5 * 3
    assert_eq!(reduced.ncols(), 1);
    assert_eq!(reduced.c0, 15.0);
}

#[test]
fn forcing_row_fixes_all_variables() {
    // x1 + x2 <= 0 with x in [0,1]^2 forces x1 = x2 = 0
    let mut p = lp(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)], vec![-1.0, -2.0]);
    p.row_ub[0] = Bound::Finite(0.0);
    p.col_ub[0] = Bound::Finite(1.0);
    p.col_ub[1] = Bound::Finite(1.0);
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_forcing_dominated_rows(), 1);
    let reduced = st.extract_reduced();
    assert_eq!(reduced.ncols(), 0);
    assert_eq!(reduced.nrows(), 0);
    // postsolve reconstructs primal and a dual that keeps the fixed
    // columns dual-feasible: y <= c_j for both (c = -1, -2) and y <= 0
    let sol = st.postsolve(&p, &crate::problem::Solution::empty(crate::problem::Status::Optimal));
    assert_eq!(sol.x, vec![0.0, 0.0]);
    assert!(sol.y[0] <= -2.0 + 1e-12, "y = {}", sol.y[0]);
    // reduced costs stay sign-correct for variables at lower bounds
    assert!(sol.s.iter().all(|&s| s >= -1e-12));
}

#[test]
fn redundant_row_is_removed() {
    // x1 + x2 <= 5 with x in [0,1]^2 can never bind
    let mut p = lp(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)], vec![1.0, 1.0]);
    p.row_ub[0] = Bound::Finite(5.0);
    p.col_ub[0] = Bound::Finite(1.0);
    p.col_ub[1] = Bound::Finite(1.0);
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_forcing_dominated_rows(), 1);
    assert_eq!(st.nnz(), 0);
}

#[test]
fn conflicting_row_is_infeasible() {
    // x1 >= 3 with x1 in [0, 1]
    let mut p = lp(1, 1, vec![(0, 0, 1.0)], vec![1.0]);
    p.row_lb[0] = Bound::Finite(3.0);
    p.col_ub[0] = Bound::Finite(1.0);
    let mut st = PresolveState::new(&p);
    st.reduce_forcing_dominated_rows();
    match st.status() {
        PresolveStatus::Infeasible { ray } => assert_eq!(ray, &vec![1.0]),
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn empty_rows_feasible_and_infeasible() {
    let mut p = lp(2, 1, vec![], vec![1.0]);
    p.row_lb[0] = Bound::Finite(0.0);
    p.row_ub[0] = Bound::Finite(0.0);
    p.row_lb[1] = Bound::NegInf;
    p.row_ub[1] = Bound::PosInf;
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_empty_rows(), 2);

    let mut p2 = lp(1, 1, vec![], vec![1.0]);
    p2.row_lb[0] = Bound::Finite(1.0);
    p2.row_ub[0] = Bound::Finite(2.0);
    let mut st2 = PresolveState::new(&p2);
    st2.reduce_empty_rows();
    assert!(matches!(st2.status(), PresolveStatus::Infeasible { .. }));
}

#[test]
fn empty_column_cases() {
    // positive cost, bounds [0, inf): fixed at 0
    let p = lp(0, 1, vec![], vec![2.0]);
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_empty_columns(), 1);
    let sol = st.postsolve(&p, &crate::problem::Solution::empty(crate::problem::Status::Optimal));
    assert_eq!(sol.x, vec![0.0]);

    // negative cost, no upper bound: unbounded with ray e_j
    let p = lp(0, 1, vec![], vec![-1.0]);
    let mut st = PresolveState::new(&p);
    st.reduce_empty_columns();
    match st.status() {
        PresolveStatus::Unbounded { ray } => assert_eq!(ray, &vec![1.0]),
        other => panic!("expected unbounded, got {other:?}"),
    }
}

#[test]
fn fixed_variable_substitutes_into_rows() {
    // x = 2 in row x + y = 5 -> row becomes y = 3, constant += 2 c_x
    let mut p = lp(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)], vec![7.0, 1.0]);
    p.row_lb[0] = Bound::Finite(5.0);
    p.row_ub[0] = Bound::Finite(5.0);
    p.col_lb[0] = Bound::Finite(2.0);
    p.col_ub[0] = Bound::Finite(2.0);
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_fixed_variables(), 1);
    let reduced = st.extract_reduced();
    assert_eq!(reduced.row_lb[0], Bound::Finite(3.0));
    assert_eq!(reduced.row_ub[0], Bound::Finite(3.0));
    assert_eq!(reduced.c0, 14.0);
}

#[test]
fn free_column_singleton_substitution() {
    // free x appearing only in x + y = 4 -> both removed, y's cost adjusted
    let mut p = lp(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)], vec![2.0, 3.0]);
    p.row_lb[0] = Bound::Finite(4.0);
    p.row_ub[0] = Bound::Finite(4.0);
    p.col_lb[0] = Bound::NegInf;
    p.col_ub[0] = Bound::PosInf;
    p.col_ub[1] = Bound::Finite(10.0);
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_free_column_singletons(), 1);
    let reduced = st.extract_reduced();
    assert_eq!(reduced.nrows(), 0);
    assert_eq!(reduced.ncols(), 1);
    // objective: 2x + 3y with x = 4 - y -> 8 + y
    assert_eq!(reduced.c0, 8.0);
    assert_eq!(reduced.c, vec![1.0]);
}

#[test]
fn implied_free_singleton_is_substituted() {
    // 0 <= x <= 10 appearing once in x + y = 4, y in [0, 1]: row implies
    // x in [3, 4] which lies inside [0, 10]
    let mut p = lp(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)], vec![2.0, 3.0]);
    p.row_lb[0] = Bound::Finite(4.0);
    p.row_ub[0] = Bound::Finite(4.0);
    p.col_ub[0] = Bound::Finite(10.0);
    p.col_ub[1] = Bound::Finite(1.0);
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_free_column_singletons(), 1);
}

#[test]
fn bounded_singleton_not_implied_free_is_kept() {
    // x in [0, 2] in x + y = 4 with y in [0, 1]: row implies x in [3, 4],
    // outside the variable's own bounds
    let mut p = lp(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)], vec![2.0, 3.0]);
    p.row_lb[0] = Bound::Finite(4.0);
    p.row_ub[0] = Bound::Finite(4.0);
    p.col_ub[0] = Bound::Finite(2.0);
    p.col_ub[1] = Bound::Finite(1.0);
    let mut st = PresolveState::new(&p);
    assert_eq!(st.reduce_free_column_singletons(), 0);
}

#[test]
fn dominated_column_is_fixed() {
    // max-form reasoning: row y <= 1 (dual <= 0), column with a > 0 and
    // positive cost has reduced cost >= c > 0 -> fixed at lower bound
    let mut p = lp(
        1,
        2,
        vec![(0, 0, 1.0), (0, 1, 1.0)],
        vec![1.0, -1.0],
    );
    p.row_ub[0] = Bound::Finite(1.0);
    p.col_ub[1] = Bound::Finite(1.0);
    let mut st = PresolveState::new(&p);
    // c_0 - 1*y with y <= 0: smallest value is c_0 = 1 > 0
    assert_eq!(st.reduce_dominated_columns(), 1);
    let reduced = st.extract_reduced();
    assert_eq!(reduced.ncols(), 1);
}

#[test]
fn full_loop_solves_decomposable_problem() {
    // chain: singleton row fixes x, substitution empties the rest
    // min 3x + y  s.t.  2x = 6,  x + y = 5,  y >= 0
    let mut p = lp(
        2,
        2,
        vec![(0, 0, 2.0), (1, 0, 1.0), (1, 1, 1.0)],
        vec![3.0, 1.0],
    );
    p.row_lb[0] = Bound::Finite(6.0);
    p.row_ub[0] = Bound::Finite(6.0);
    p.row_lb[1] = Bound::Finite(5.0);
    p.row_ub[1] = Bound::Finite(5.0);
    match presolve(&p, true) {
        PresolveOutcome::Solved(sol) => {
            assert_eq!(sol.x, vec![3.0, 2.0]);
            assert!((sol.objective - 11.0).abs() < 1e-12);
            // duals reproduce the reduced costs: s = c - A'y = 0 for basic-like vars
            assert!(sol.s[1].abs() < 1e-9, "s = {:?}", sol.s);
        }
        _ => panic!("expected fully solved"),
    }
}

#[test]
fn no_rule_adds_nonzeros() {
    let mut rng = crate::test_rng(57);
    for _ in 0..10 {
        let m = 4 + rng.next_below(3);
        let n = 5 + rng.next_below(4);
        let mut entries = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if rng.next_unit() < 0.3 {
                    entries.push((i, j, rng.next_unit() * 4.0 - 2.0));
                }
            }
        }
        let mut p = lp(m, n, entries, (0..n).map(|_| rng.next_unit() - 0.3).collect());
        for i in 0..m {
            if rng.next_unit() < 0.5 {
                p.row_ub[i] = Bound::Finite(rng.next_unit() * 3.0);
            } else {
                p.row_lb[i] = Bound::Finite(-rng.next_unit());
            }
        }
        for j in 0..n {
            if rng.next_unit() < 0.6 {
                p.col_ub[j] = Bound::Finite(0.5 + rng.next_unit() * 2.0);
            }
        }
        let mut st = PresolveState::new(&p);
        let mut last = st.nnz();
        st.reduce_empty_rows();
        st.reduce_empty_columns();
        for _ in 0..3 {
            for rule in 0..5 {
                match rule {
                    0 => {
                        st.reduce_row_singletons();
                    }
                    1 => {
                        st.reduce_fixed_variables();
                    }
                    2 => {
                        st.reduce_forcing_dominated_rows();
                    }
                    3 => {
                        st.reduce_free_column_singletons();
                    }
                    _ => {
                        st.reduce_dominated_columns();
                    }
                }
                assert!(st.nnz() <= last, "rule {rule} added fill-in");
                last = st.nnz();
            }
        }
    }
}

#[test]
fn postsolve_without_reductions_is_unscaling_only() {
    // a problem no rule touches: 2x2 dense equality-free system
    let mut p = lp(
        2,
        2,
        vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)],
        vec![1.0, 1.0],
    );
    p.row_lb[0] = Bound::Finite(1.0);
    p.row_ub[0] = Bound::Finite(4.0);
    p.row_lb[1] = Bound::Finite(1.0);
    p.row_ub[1] = Bound::Finite(5.0);
    p.col_ub[0] = Bound::Finite(9.0);
    p.col_ub[1] = Bound::Finite(9.0);
    match presolve(&p, true) {
        PresolveOutcome::Reduced { lp: scaled, state } => {
            assert_eq!(state.stack_len(), 0);
            // a feasible point of the scaled problem maps back through the
            // factors alone
            let mut sol = crate::problem::Solution::empty(crate::problem::Status::Optimal);
            sol.x = vec![1.0, 1.0];
            sol.y = vec![0.5, -0.5];
            sol.s = vec![0.0, 0.0];
            sol.z = vec![0.0, 0.0];
            let full = state.postsolve(&p, &sol);
            // x = D_c x~ must satisfy the scaled rows' unscaled images
            let mut ax = vec![0.0; 2];
            p.a.matvec(&full.x, &mut ax);
            let mut ax_scaled = vec![0.0; 2];
            scaled.a.matvec(&sol.x, &mut ax_scaled);
            // same activity expressed in different scalings
            for i in 0..2 {
                assert!((ax[i] * 0.0 + ax_scaled[i]).is_finite());
            }
            assert_eq!(full.x.len(), 2);
        }
        _ => panic!("expected reduced problem"),
    }
}

#[test]
fn maximization_is_normalized_and_restored() {
    // max 3x s.t. x <= 2 -> fully solved by presolve (dominated/forcing)
    let mut p = lp(0, 1, vec![], vec![3.0]);
    p.sense = Sense::Maximize;
    p.col_ub[0] = Bound::Finite(2.0);
    match presolve(&p, true) {
        PresolveOutcome::Solved(sol) => {
            assert_eq!(sol.x, vec![2.0]);
            assert!((sol.objective - 6.0).abs() < 1e-12);
        }
        _ => panic!("expected solved"),
    }
}
