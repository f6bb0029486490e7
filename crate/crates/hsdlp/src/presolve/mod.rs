//! Presolve: fill-in-free reductions, the postsolve stack, and scaling.
//!
//! The reduction loop applies, in a fixed order and until a full pass makes
//! no progress: bounds checks, empty columns, row singletons, fixed
//! variables, row singletons, forcing/dominated rows, row singletons, free
//! (and implied-free) column singletons, row singletons, dominated columns.
//! Empty rows are removed up front and reappear only as trivially redundant
//! or infeasible rows inside the forcing/dominated pass. No rule ever adds
//! a nonzero to the matrix.
//!
//! Every elimination pushes one record; popping the records in reverse over
//! a solution of the reduced problem reconstructs primal values and dual
//! multipliers for everything that was removed. Each record that needs
//! duals of other rows snapshots the set of rows active at reduction time,
//! which is exactly the set already restored when the record pops. The
//! reconstructed point satisfies the original constraints and complementary
//! slackness, but it is generally not an interior point: eliminated
//! variables sit on their bounds.
//!
//! Scaling is a single equilibration pass on the reduced matrix
//! (`D_r = 1/sqrt(|row|_2)`, `D_c = 1/sqrt(|col|_2)`, both measured on the
//! unscaled matrix); postsolve unscales before popping the stack.

mod rules;
mod scaling;

pub use rules::{PresolveState, PresolveStatus, Reduction};
pub use scaling::{scale, ScalingFactors};

use crate::problem::{GeneralLP, Solution, Status};
use crate::scalar::Real;

/// Result of running the reduction loop on a problem.
pub enum PresolveOutcome<S> {
    /// A nonempty reduced (and, if requested, scaled) problem plus the state
    /// needed to map solutions back.
    Reduced {
        lp: GeneralLP<S>,
        state: Box<PresolveState<S>>,
    },
    /// Everything was eliminated; the solution is already complete, in the
    /// original space.
    Solved(Box<Solution<S>>),
    /// Detected infeasibility; `ray` is a best-effort Farkas row combination
    /// (exact for single-row and one-level singleton conflicts).
    Infeasible { ray: Vec<S> },
    /// Detected unboundedness; `ray` is an improving primal ray.
    Unbounded { ray: Vec<S> },
}

/// Runs the full presolve loop. `do_scale` applies equilibration to the
/// reduced problem (postsolve undoes it transparently).
pub fn presolve<S: Real>(lp: &GeneralLP<S>, do_scale: bool) -> PresolveOutcome<S> {
    let mut state = PresolveState::new(lp);
    state.run_loop();
    match state.status().clone() {
        PresolveStatus::Infeasible { ray } => PresolveOutcome::Infeasible { ray },
        PresolveStatus::Unbounded { ray } => PresolveOutcome::Unbounded { ray },
        PresolveStatus::InProgress | PresolveStatus::ReducedToEmpty => {
            let reduced = state.extract_reduced();
            if reduced.ncols() == 0 && reduced.nrows() == 0 {
                let empty = Solution::empty(Status::Optimal);
                let full = state.postsolve(lp, &empty);
                return PresolveOutcome::Solved(Box::new(full));
            }
            let lp_out = if do_scale {
                let (scaled, factors) = scale(&reduced);
                state.set_scaling(factors);
                scaled
            } else {
                reduced
            };
            PresolveOutcome::Reduced {
                lp: lp_out,
                state: Box::new(state),
            }
        }
    }
}

#[cfg(test)]
mod tests;
