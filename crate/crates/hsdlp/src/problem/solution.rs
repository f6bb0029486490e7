use crate::scalar::Real;

/// Terminal state of a solve.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    TimeLimit,
    NumericalFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "Optimal",
            Status::PrimalInfeasible => "PrimalInfeasible",
            Status::DualInfeasible => "DualInfeasible",
            Status::IterationLimit => "IterationLimit",
            Status::TimeLimit => "TimeLimit",
            Status::NumericalFailure => "NumericalFailure",
        }
    }
}

/// Per-solve counters and monitors, kept for the regression invariants.
#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub iterations: usize,
    /// Number of `(c,b,u)`-side augmented solves; must equal `iterations`
    /// actually performing a Newton step (the (p,q) pair is cached).
    pub pq_solves: usize,
    /// Total augmented-system solves, refinement excluded.
    pub kkt_solves: usize,
    /// Regularization rescue events.
    pub rescues: usize,
    /// Barrier parameter per iteration, recorded in f64.
    pub mu_history: Vec<f64>,
    pub step_history: Vec<f64>,
    /// False if any iterate lost strict positivity (should never happen).
    pub positivity_ok: bool,
    /// Largest relative increase of mu between consecutive iterations.
    pub max_mu_uptick: f64,
}

/// Primal-dual solution (or certificate) in whichever variable space the
/// producing stage works in: the IPM emits standard-form solutions, uncrush
/// and postsolve rewrite them into the original space.
#[derive(Clone, Debug)]
pub struct Solution<S> {
    pub status: Status,
    /// Primal values per variable.
    pub x: Vec<S>,
    /// Row duals.
    pub y: Vec<S>,
    /// Reduced costs per variable.
    pub s: Vec<S>,
    /// Upper-bound duals per variable (zero where no finite upper bound).
    pub z: Vec<S>,
    pub objective: S,
    /// Unbounded primal ray (present iff status is DualInfeasible).
    pub primal_ray: Option<Vec<S>>,
    /// Farkas dual ray (present iff status is PrimalInfeasible).
    pub dual_ray: Option<Vec<S>>,
    pub stats: SolveStats,
}

impl<S: Real> Solution<S> {
    pub fn empty(status: Status) -> Self {
        Solution {
            status,
            x: Vec::new(),
            y: Vec::new(),
            s: Vec::new(),
            z: Vec::new(),
            objective: S::zero(),
            primal_ray: None,
            dual_ray: None,
            stats: SolveStats {
                positivity_ok: true,
                ..SolveStats::default()
            },
        }
    }
}
