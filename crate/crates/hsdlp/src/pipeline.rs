//! End-to-end solve pipeline over a [`GeneralLP`]: validation, presolve and
//! scaling, standard-form conversion, the interior-point solve, and the
//! inverse maps back to the original variables.

use thiserror::Error;

use crate::ipm::{self, Parameters, SolveError};
use crate::kkt::Backend;
use crate::presolve::{presolve, PresolveOutcome};
use crate::problem::{
    to_standard_form, uncrush, CrushError, Diagnostic, GeneralLP, Solution, Status,
};
use crate::scalar::Real;

/// Pipeline configuration.
#[derive(Clone, Debug)]
pub struct SolveOptions<S> {
    pub params: Parameters<S>,
    pub backend: Backend,
    /// Run the reduction loop and scaling before solving.
    pub presolve: bool,
}

impl<S: Real> Default for SolveOptions<S> {
    fn default() -> Self {
        SolveOptions {
            params: Parameters::default(),
            backend: Backend::SparseLdl,
            presolve: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid problem: {0:?}")]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Crush(#[from] CrushError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Solves a general-form LP and returns the solution in its own variable
/// space.
pub fn solve_lp<S: Real>(
    lp: &GeneralLP<S>,
    opts: &SolveOptions<S>,
) -> Result<Solution<S>, PipelineError> {
    let diagnostics = lp.validate();
    if !diagnostics.is_empty() {
        return Err(PipelineError::Invalid(diagnostics));
    }

    if opts.presolve {
        match presolve(lp, true) {
            PresolveOutcome::Solved(sol) => Ok(*sol),
            PresolveOutcome::Infeasible { ray } => {
                let mut sol = Solution::empty(Status::PrimalInfeasible);
                sol.x = vec![S::zero(); lp.ncols()];
                sol.y = vec![S::zero(); lp.nrows()];
                sol.s = vec![S::zero(); lp.ncols()];
                sol.z = vec![S::zero(); lp.ncols()];
                sol.dual_ray = Some(ray);
                Ok(sol)
            }
            PresolveOutcome::Unbounded { ray } => {
                let mut sol = Solution::empty(Status::DualInfeasible);
                sol.x = vec![S::zero(); lp.ncols()];
                sol.y = vec![S::zero(); lp.nrows()];
                sol.s = vec![S::zero(); lp.ncols()];
                sol.z = vec![S::zero(); lp.ncols()];
                sol.primal_ray = Some(ray);
                Ok(sol)
            }
            PresolveOutcome::Reduced { lp: reduced, state } => {
                let (std_lp, map) = to_standard_form(&reduced)?;
                let std_sol = ipm::solve(&std_lp, &opts.params, opts.backend)?;
                let reduced_sol = uncrush(&reduced, &map, &std_sol)?;
                Ok(state.postsolve(lp, &reduced_sol))
            }
        }
    } else {
        let (std_lp, map) = to_standard_form(lp)?;
        let std_sol = ipm::solve(&std_lp, &opts.params, opts.backend)?;
        Ok(uncrush(lp, &map, &std_sol)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Bound;
    use crate::sparse::CscMatrix;

    #[test]
    fn pipeline_with_and_without_presolve_agree() {
        // min -x1 - 2 x2  s.t.  x1 + x2 <= 4,  -2 <= x1 - x2,  0 <= x <= 3
        let a = CscMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)],
        );
        let mut lp = GeneralLP::new(a, vec![-1.0, -2.0]);
        lp.row_ub[0] = Bound::Finite(4.0);
        lp.row_lb[1] = Bound::Finite(-2.0);
        lp.col_ub = vec![Bound::Finite(3.0), Bound::Finite(3.0)];

        let with = solve_lp(&lp, &SolveOptions::default()).unwrap();
        let mut opts = SolveOptions::default();
        opts.presolve = false;
        let without = solve_lp(&lp, &opts).unwrap();
        assert_eq!(with.status, Status::Optimal);
        assert_eq!(without.status, Status::Optimal);
        assert!((with.objective - without.objective).abs() < 1e-8);
        // optimum at x = (1, 3): objective -7
        assert!((with.objective + 7.0).abs() < 1e-7);
    }

    #[test]
    fn invalid_problem_is_rejected() {
        let a = CscMatrix::from_triplets(0, 1, Vec::<(usize, usize, f64)>::new());
        let mut lp = GeneralLP::new(a, vec![1.0]);
        lp.col_lb[0] = Bound::Finite(1.0);
        lp.col_ub[0] = Bound::Finite(0.0);
        assert!(matches!(
            solve_lp(&lp, &SolveOptions::default()),
            Err(PipelineError::Invalid(_))
        ));
    }

    #[test]
    fn maximization_round_trip() {
        // max x + y  s.t.  x + 2y <= 4,  x <= 2  (optimum x=2, y=1, obj 3)
        let a = CscMatrix::from_triplets(1, 2, vec![(0, 0, 1.0), (0, 1, 2.0)]);
        let mut lp = GeneralLP::new(a, vec![1.0, 1.0]);
        lp.sense = crate::problem::Sense::Maximize;
        lp.row_ub[0] = Bound::Finite(4.0);
        lp.col_ub[0] = Bound::Finite(2.0);
        for presolve_on in [true, false] {
            let mut opts = SolveOptions::default();
            opts.presolve = presolve_on;
            let sol = solve_lp(&lp, &opts).unwrap();
            assert_eq!(sol.status, Status::Optimal, "presolve={presolve_on}");
            assert!(
                (sol.objective - 3.0).abs() < 1e-6,
                "presolve={presolve_on} obj={}",
                sol.objective
            );
            assert!((sol.x[0] - 2.0).abs() < 1e-6);
            assert!((sol.x[1] - 1.0).abs() < 1e-6);
        }
    }
}
