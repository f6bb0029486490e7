//! The regularized homogeneous interior-point driver.
//!
//! One iteration: refresh residuals and test the stopping criteria; update
//! the KKT backend with the current scaling diagonal and regularizations
//! (computing the cached `(p, q)` solve); take a Mehrotra
//! predictor-corrector direction; try up to `max_corrections` additional
//! centrality corrections, keeping each only if it lengthens the step;
//! decay the regularizations; step with damping 0.9995.
//!
//! The homogeneous embedding makes infeasibility ordinary output rather
//! than a failure mode: when `mu` and `tau/kappa` both collapse, the
//! iterate itself is the certificate (an unbounded primal ray when
//! `c'x < 0`, a Farkas dual ray when `b'y - u'z > 0`).
//!
//! On a numerical breakdown inside the linear solver, the regularizations
//! are boosted by `reg_rescue_factor` and the iteration retried; three
//! consecutive boosts without progress abort the solve with
//! `NumericalFailure`.

mod iterate;

pub use iterate::{max_step, Iterate, Residuals};

use std::io::Write;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::kkt::{self, Backend, Direction, KktError, KktSolver, NewtonContext, NewtonRhs};
use crate::problem::{Solution, SolveStats, StandardLP, Status};
use crate::scalar::Real;
use crate::vecops;

/// Algorithm parameters. Defaults follow the solver's reference settings:
/// every tolerance at `sqrt(machine epsilon)` of the scalar type, at most
/// 100 iterations, 5 centrality corrections, step damping 0.9995.
#[derive(Clone, Debug)]
pub struct Parameters<S> {
    /// Primal feasibility tolerance.
    pub eps_p: S,
    /// Dual feasibility tolerance.
    pub eps_d: S,
    /// Optimality-gap tolerance.
    pub eps_g: S,
    /// Infeasibility-detection tolerance.
    pub eps_i: S,
    /// Mehrotra gamma floor.
    pub gamma_min: S,
    /// Half-width exponent of the centrality target band
    /// `[gamma mu beta, gamma mu / beta]`.
    pub beta: S,
    pub max_corrections: usize,
    pub max_iterations: usize,
    pub time_limit: Option<Duration>,
    /// Fraction of the maximum step actually taken.
    pub step_damping: S,
    /// A further correction is attempted only if the step grew by this
    /// factor.
    pub correction_threshold: S,
    pub reg_initial: S,
    pub reg_floor: S,
    pub reg_divisor: S,
    pub reg_rescue_factor: S,
    pub reg_rescue_limit: usize,
    /// Emit the iteration log on standard error.
    pub verbose: bool,
}

impl<S: Real> Default for Parameters<S> {
    fn default() -> Self {
        let sqrt_eps = S::epsilon().sqrt();
        Parameters {
            eps_p: sqrt_eps,
            eps_d: sqrt_eps,
            eps_g: sqrt_eps,
            eps_i: sqrt_eps,
            gamma_min: S::from_f64(0.1),
            beta: S::from_f64(0.1),
            max_corrections: 5,
            max_iterations: 100,
            time_limit: None,
            step_damping: S::from_f64(0.9995),
            correction_threshold: S::from_f64(1.10),
            reg_initial: S::one(),
            reg_floor: sqrt_eps,
            reg_divisor: S::from_f64(10.0),
            reg_rescue_factor: S::from_f64(100.0),
            reg_rescue_limit: 3,
            verbose: false,
        }
    }
}

/// Proximal regularization state.
#[derive(Clone, Copy, Debug)]
pub struct Regularizations<S> {
    pub rho_p: S,
    pub rho_d: S,
    pub rho_g: S,
    consecutive_rescues: usize,
}

impl<S: Real> Regularizations<S> {
    pub fn new(params: &Parameters<S>) -> Self {
        Regularizations {
            rho_p: params.reg_initial,
            rho_d: params.reg_initial,
            rho_g: params.reg_initial,
            consecutive_rescues: 0,
        }
    }

    /// Per-iteration decay `rho <- max(floor, rho / divisor)`.
    pub fn decay(&mut self, params: &Parameters<S>) {
        self.rho_p = params.reg_floor.max(self.rho_p / params.reg_divisor);
        self.rho_d = params.reg_floor.max(self.rho_d / params.reg_divisor);
        self.rho_g = params.reg_floor.max(self.rho_g / params.reg_divisor);
    }

    /// Rescue boost after a numerical breakdown; false once the consecutive
    /// limit is exhausted.
    pub fn rescue(&mut self, params: &Parameters<S>) -> bool {
        if self.consecutive_rescues >= params.reg_rescue_limit {
            return false;
        }
        self.consecutive_rescues += 1;
        self.rho_p *= params.reg_rescue_factor;
        self.rho_d *= params.reg_rescue_factor;
        self.rho_g *= params.reg_rescue_factor;
        // a zero regularization cannot be rescued multiplicatively
        let floor = params.reg_floor.max(S::epsilon().sqrt());
        self.rho_p = self.rho_p.max(floor);
        self.rho_d = self.rho_d.max(floor);
        self.rho_g = self.rho_g.max(floor);
        true
    }

    pub fn clear_rescues(&mut self) {
        self.consecutive_rescues = 0;
    }

    pub fn rescues(&self) -> usize {
        self.consecutive_rescues
    }
}

/// Mehrotra centering weight from the affine step size:
/// `gamma = (1 - a)^2 min(gamma_min, 1 - a)`, `eta = 1 - gamma`.
pub fn mehrotra_gamma<S: Real>(alpha_aff: S, gamma_min: S) -> (S, S) {
    let one = S::one();
    let r = one - alpha_aff;
    let gamma = r * r * gamma_min.min(r);
    (gamma, one - gamma)
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("kkt backend error: {0}")]
    Kkt(#[from] KktError),
}

struct ProblemNorms<S> {
    b_inf: S,
    c_inf: S,
    u_inf: S,
}

enum Verdict {
    Continue,
    Done(Status),
}

fn check_termination<S: Real>(
    std: &StandardLP<S>,
    it: &Iterate<S>,
    params: &Parameters<S>,
    norms: &ProblemNorms<S>,
) -> Verdict {
    let one = S::one();
    let tau = it.tau;
    let primal_ok = it.res.rp_inf / (tau * (one + norms.b_inf)) < params.eps_p;
    let dual_ok = it.res.rd_inf / (tau * (one + norms.c_inf)) < params.eps_d
        && (std.nbounded() == 0 || it.res.ru_inf / (tau * (one + norms.u_inf)) < params.eps_d);
    let pobj = it.primal_obj(std);
    let dobj = it.dual_obj(std);
    let gap_ok = (pobj - dobj).abs() / (tau + dobj.abs()) < params.eps_g;
    if primal_ok && dual_ok && gap_ok {
        return Verdict::Done(Status::Optimal);
    }
    // infeasibility branch: a complementary solution with small tau
    if it.mu < params.eps_i && tau / it.kappa < params.eps_i {
        if pobj < -params.eps_i {
            return Verdict::Done(Status::DualInfeasible);
        }
        if -dobj < -params.eps_i {
            return Verdict::Done(Status::PrimalInfeasible);
        }
    }
    Verdict::Continue
}

/// Solves a standard-form LP with the selected KKT backend.
pub fn solve<S: Real>(
    std: &StandardLP<S>,
    params: &Parameters<S>,
    backend: Backend,
) -> Result<Solution<S>, SolveError> {
    let mut kkt = kkt::setup(&std.a, backend)?;
    solve_with(std, params, kkt.as_mut())
}

/// Solve against an already-set-up backend (the backend must be bound to
/// `std.a`).
pub fn solve_with<S: Real>(
    std: &StandardLP<S>,
    params: &Parameters<S>,
    kkt: &mut dyn KktSolver<S>,
) -> Result<Solution<S>, SolveError> {
    let n = std.ncols();
    let nb = std.nbounded();

    if n == 0 && std.nrows() == 0 {
        // completely eliminated problem
        let mut sol = Solution::empty(Status::Optimal);
        sol.objective = std.c0;
        sol.stats.positivity_ok = true;
        return Ok(sol);
    }

    let norms = ProblemNorms {
        b_inf: vecops::norm_inf(&std.b),
        c_inf: vecops::norm_inf(&std.c),
        u_inf: vecops::norm_inf(&std.upper.val),
    };

    let mut it = Iterate::initialize(std);
    let mut regs = Regularizations::new(params);
    let mut stats = SolveStats {
        positivity_ok: true,
        ..SolveStats::default()
    };

    if params.verbose {
        let (m_k, n_k) = kkt.dims();
        eprintln!(
            "ipm: arithmetic={} backend={} rows={} cols={} bounded={} system=augmented",
            S::NAME,
            kkt.backend_name(),
            m_k,
            n_k,
            nb
        );
        eprintln!(
            "{:>5} {:>12} {:>9} {:>12} {:>12} {:>12} {:>9} {:>9} {:>9} {:>3}",
            "iter", "mu", "alpha", "rp", "rd", "rg", "rho_p", "rho_d", "rho_g", "cc"
        );
    }

    let start = Instant::now();
    let mut iteration = 0usize;
    loop {
        stats.mu_history.push(it.mu.to_f64());
        if stats.mu_history.len() >= 2 {
            let prev = stats.mu_history[stats.mu_history.len() - 2];
            if prev > 0.0 {
                let uptick = it.mu.to_f64() / prev - 1.0;
                if uptick > stats.max_mu_uptick {
                    stats.max_mu_uptick = uptick;
                }
            }
        }
        if let Verdict::Done(status) = check_termination(std, &it, params, &norms) {
            return Ok(build_solution(std, &it, status, stats));
        }
        if iteration >= params.max_iterations {
            return Ok(build_solution(std, &it, Status::IterationLimit, stats));
        }
        if let Some(limit) = params.time_limit {
            if start.elapsed() >= limit {
                return Ok(build_solution(std, &it, Status::TimeLimit, stats));
            }
        }

        let (dir, alpha_max, ncorr) = loop {
            match compute_direction(std, &it, kkt, &regs, params, &mut stats) {
                Ok(out) => break out,
                Err(KktError::NumericalBreakdown(_)) | Err(KktError::DegenerateTau) => {
                    stats.rescues += 1;
                    if !regs.rescue(params) {
                        return Ok(build_solution(std, &it, Status::NumericalFailure, stats));
                    }
                }
                Err(e) => return Err(SolveError::Kkt(e)),
            }
        };
        regs.clear_rescues();

        regs.decay(params);
        let alpha = params.step_damping * alpha_max;
        if !it.take_step(std, &dir, alpha) || !it.strictly_positive() {
            stats.positivity_ok = false;
        }
        iteration += 1;
        stats.iterations = iteration;
        stats.step_history.push(alpha.to_f64());

        if params.verbose {
            let mut err = std::io::stderr().lock();
            let _ = writeln!(
                err,
                "{:5} {:12.5e} {:9.4} {:12.5e} {:12.5e} {:12.5e} {:9.2e} {:9.2e} {:9.2e} {:3}",
                iteration,
                it.mu.to_f64(),
                alpha.to_f64(),
                it.res.rp_inf.to_f64().max(it.res.ru_inf.to_f64()),
                it.res.rd_inf.to_f64(),
                it.res.rg.to_f64(),
                regs.rho_p.to_f64(),
                regs.rho_d.to_f64(),
                regs.rho_g.to_f64(),
                ncorr
            );
        }
    }
}

/// One full direction computation: context, predictor, corrector,
/// centrality corrections. Returns the final direction, its maximum step
/// and the number of accepted corrections.
fn compute_direction<S: Real>(
    std: &StandardLP<S>,
    it: &Iterate<S>,
    kkt: &mut dyn KktSolver<S>,
    regs: &Regularizations<S>,
    params: &Parameters<S>,
    stats: &mut SolveStats,
) -> Result<(Direction<S>, S, usize), KktError> {
    let n = std.ncols();
    let m = std.nrows();
    let nb = std.nbounded();

    let ctx = NewtonContext::prepare(std, it.point(), regs.rho_p, regs.rho_d, regs.rho_g, kkt)?;
    stats.pq_solves += 1;

    // predictor: full residual reduction, complementarity toward zero
    let mut rhs = NewtonRhs::zero(n, m, nb);
    rhs.xi_d.copy_from_slice(&it.res.rd);
    rhs.xi_p.copy_from_slice(&it.res.rp);
    rhs.xi_u.copy_from_slice(&it.res.ru);
    rhs.xi_g = it.res.rg;
    for j in 0..n {
        rhs.xi_xs[j] = -it.x[j] * it.s[j];
    }
    for k in 0..nb {
        rhs.xi_wz[k] = -it.w[k] * it.z[k];
    }
    rhs.xi_tk = -it.tau * it.kappa;
    let affine = ctx.solve(std, kkt, &rhs)?;
    stats.kkt_solves += 1;

    let alpha_aff = max_step(it, &affine);
    let (gamma, eta) = mehrotra_gamma(alpha_aff, params.gamma_min);

    // corrector: weighted residuals, second-order complementarity target
    let gm = gamma * it.mu;
    for j in 0..n {
        rhs.xi_d[j] = eta * it.res.rd[j];
        rhs.xi_xs[j] = -it.x[j] * it.s[j] + gm - affine.dx[j] * affine.ds[j];
    }
    for i in 0..m {
        rhs.xi_p[i] = eta * it.res.rp[i];
    }
    for k in 0..nb {
        rhs.xi_u[k] = eta * it.res.ru[k];
        rhs.xi_wz[k] = -it.w[k] * it.z[k] + gm - affine.dw[k] * affine.dz[k];
    }
    rhs.xi_g = eta * it.res.rg;
    rhs.xi_tk = -it.tau * it.kappa + gm - affine.dtau * affine.dkappa;
    let mut dir = ctx.solve(std, kkt, &rhs)?;
    stats.kkt_solves += 1;

    let mut alpha = max_step(it, &dir);
    let mut ncorr = 0usize;
    while ncorr < params.max_corrections {
        match centrality_correction(std, it, &dir, gamma, params, &ctx, kkt, alpha)? {
            None => break,
            Some(candidate) => {
                stats.kkt_solves += 1;
                let alpha_new = max_step(it, &candidate);
                if alpha_new <= alpha {
                    break;
                }
                let sufficient = alpha_new >= params.correction_threshold * alpha;
                dir = candidate;
                alpha = alpha_new;
                ncorr += 1;
                if !sufficient {
                    break;
                }
            }
        }
    }
    Ok((dir, alpha, ncorr))
}

/// One additional centrality correction: push the complementarity products
/// of the tentative point into the band `[gamma mu beta, gamma mu / beta]`
/// via a zero-residual Newton solve, and return the corrected direction.
/// `None` when every product already sits inside the band.
#[allow(clippy::too_many_arguments)]
fn centrality_correction<S: Real>(
    std: &StandardLP<S>,
    it: &Iterate<S>,
    dir: &Direction<S>,
    gamma: S,
    params: &Parameters<S>,
    ctx: &NewtonContext<S>,
    kkt: &mut dyn KktSolver<S>,
    alpha_max: S,
) -> Result<Option<Direction<S>>, KktError> {
    let n = std.ncols();
    let m = std.nrows();
    let nb = std.nbounded();
    let one = S::one();
    let two = S::from_f64(2.0);

    let alpha_t = one.min(two * alpha_max);
    let mu_l = gamma * it.mu * params.beta;
    let mu_u = gamma * it.mu / params.beta;

    // targets for the tentative complementarity products
    let mut targets = vec![S::zero(); n + nb + 1];
    let mut any = false;
    let mut total = S::zero();
    {
        let mut push = |slot: &mut S, prod: S| {
            let t = if prod < mu_l {
                mu_l - prod
            } else if prod > mu_u {
                mu_u - prod
            } else {
                S::zero()
            };
            if t != S::zero() {
                any = true;
            }
            total += t;
            *slot = t;
        };
        for j in 0..n {
            let prod = (it.x[j] + alpha_t * dir.dx[j]) * (it.s[j] + alpha_t * dir.ds[j]);
            push(&mut targets[j], prod);
        }
        for k in 0..nb {
            let prod = (it.w[k] + alpha_t * dir.dw[k]) * (it.z[k] + alpha_t * dir.dz[k]);
            push(&mut targets[n + k], prod);
        }
        let prod = (it.tau + alpha_t * dir.dtau) * (it.kappa + alpha_t * dir.dkappa);
        push(&mut targets[n + nb], prod);
    }
    if !any {
        return Ok(None);
    }
    let mean = total / S::from_f64((n + nb + 1) as f64);

    let mut rhs = NewtonRhs::zero(n, m, nb);
    for j in 0..n {
        rhs.xi_xs[j] = targets[j] - mean;
    }
    for k in 0..nb {
        rhs.xi_wz[k] = targets[n + k] - mean;
    }
    rhs.xi_tk = targets[n + nb] - mean;

    let correction = ctx.solve(std, kkt, &rhs)?;
    let mut candidate = dir.clone();
    candidate.add_assign(&correction);
    Ok(Some(candidate))
}

fn build_solution<S: Real>(
    std: &StandardLP<S>,
    it: &Iterate<S>,
    status: Status,
    stats: SolveStats,
) -> Solution<S> {
    let n = std.ncols();
    let nb = std.nbounded();
    let mut sol = Solution {
        status,
        x: vec![S::zero(); n],
        y: vec![S::zero(); std.nrows()],
        s: vec![S::zero(); n],
        z: vec![S::zero(); n],
        objective: S::zero(),
        primal_ray: None,
        dual_ray: None,
        stats,
    };
    match status {
        Status::Optimal | Status::IterationLimit | Status::TimeLimit => {
            let inv_tau = it.tau.recip();
            for j in 0..n {
                sol.x[j] = it.x[j] * inv_tau;
                sol.s[j] = it.s[j] * inv_tau;
            }
            for i in 0..std.nrows() {
                sol.y[i] = it.y[i] * inv_tau;
            }
            for k in 0..nb {
                sol.z[std.upper.idx[k]] = it.z[k] * inv_tau;
            }
            sol.objective = it.primal_obj(std) * inv_tau + std.c0;
        }
        Status::DualInfeasible => {
            // x is an unbounded primal ray
            sol.x = it.x.clone();
            sol.primal_ray = Some(it.x.clone());
            sol.objective = it.primal_obj(std);
        }
        Status::PrimalInfeasible => {
            // y (with bound duals z) is a Farkas dual ray
            sol.y = it.y.clone();
            for k in 0..nb {
                sol.z[std.upper.idx[k]] = it.z[k];
            }
            sol.dual_ray = Some(it.y.clone());
            sol.objective = it.dual_obj(std);
        }
        Status::NumericalFailure => {}
    }
    sol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixData;
    use crate::sparse::CscMatrix;

    fn min_x_eq_one() -> StandardLP<f64> {
        let a = CscMatrix::from_triplets(1, 1, vec![(0, 0, 1.0)]);
        StandardLP::new(MatrixData::Csc(a), vec![1.0], vec![1.0])
    }

    #[test]
    fn gamma_formula() {
        let (g, e) = mehrotra_gamma(1.0, 0.1);
        assert_eq!((g, e), (0.0, 1.0));
        let (g, e) = mehrotra_gamma(0.0, 0.1);
        assert!((g - 0.1).abs() < 1e-15);
        assert!((e - 0.9).abs() < 1e-15);
        let (g, _) = mehrotra_gamma(0.5, 0.1);
        assert!((g - 0.025).abs() < 1e-15);
    }

    #[test]
    fn regularization_schedule() {
        let params = Parameters::<f64>::default();
        let mut regs = Regularizations::new(&params);
        assert_eq!(regs.rho_p, 1.0);
        regs.decay(&params);
        assert!((regs.rho_p - 0.1).abs() < 1e-15);
        for _ in 0..20 {
            regs.decay(&params);
        }
        // clamped at sqrt(eps) ~ 1.49e-8
        assert!((regs.rho_p - f64::EPSILON.sqrt()).abs() < 1e-20);

        // rescue multiplies by 100 and counts
        assert!(regs.rescue(&params));
        assert!((regs.rho_p - 100.0 * f64::EPSILON.sqrt()).abs() < 1e-12);
        assert_eq!(regs.rescues(), 1);
        assert!(regs.rescue(&params));
        assert!(regs.rescue(&params));
        assert!(!regs.rescue(&params), "fourth consecutive rescue must fail");
        regs.clear_rescues();
        assert!(regs.rescue(&params));
    }

    #[test]
    fn solves_min_x_eq_one() {
        let std = min_x_eq_one();
        let sol = solve(&std, &Parameters::default(), Backend::SparseLdl).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-7);
        assert!((sol.objective - 1.0).abs() < 1e-7);
        assert!(sol.stats.iterations <= 15, "took {}", sol.stats.iterations);
        assert!(sol.stats.positivity_ok);
        // one (p,q) solve per iteration
        assert_eq!(sol.stats.pq_solves, sol.stats.iterations);
    }

    #[test]
    fn iteration_limit_is_honored() {
        let std = min_x_eq_one();
        let mut params = Parameters::<f64>::default();
        // unreachable tolerances force the cap
        params.eps_p = 0.0;
        params.eps_d = 0.0;
        params.eps_g = 0.0;
        params.eps_i = 0.0;
        let sol = solve(&std, &params, Backend::SparseLdl).unwrap();
        assert_eq!(sol.status, Status::IterationLimit);
        assert_eq!(sol.stats.iterations, 100);
    }

    #[test]
    fn detects_dual_infeasible() {
        // min -x s.t. x - y = 0: unbounded below, ray x = y = t
        let a = CscMatrix::from_triplets(1, 2, vec![(0, 0, 1.0), (0, 1, -1.0)]);
        let std = StandardLP::new(MatrixData::Csc(a), vec![0.0], vec![-1.0, 0.0]);
        let sol = solve(&std, &Parameters::default(), Backend::SparseLdl).unwrap();
        assert_eq!(sol.status, Status::DualInfeasible);
        let ray = sol.primal_ray.expect("primal ray");
        // A ray ~ 0 and c'ray < 0
        assert!((ray[0] - ray[1]).abs() <= 1e-7 * ray[0].abs().max(1.0));
        assert!(-ray[0] < 0.0);
    }

    #[test]
    fn detects_primal_infeasible_with_farkas_ray() {
        // x = 1 and x = 2 simultaneously (two rows, one variable)
        let a = CscMatrix::from_triplets(2, 1, vec![(0, 0, 1.0), (1, 0, 1.0)]);
        let std = StandardLP::new(MatrixData::Csc(a), vec![1.0, 2.0], vec![0.0]);
        let sol = solve(&std, &Parameters::default(), Backend::SparseLdl).unwrap();
        assert_eq!(sol.status, Status::PrimalInfeasible);
        let y = sol.dual_ray.expect("dual ray");
        // Farkas: A'y <= 0, b'y > 0
        let aty = y[0] + y[1];
        let bty = y[0] + 2.0 * y[1];
        let scale = y[0].abs().max(y[1].abs());
        assert!(aty <= 1e-7 * scale, "A'y = {aty}");
        assert!(bty >= 1e-7 * scale, "b'y = {bty}");
    }

    #[test]
    fn residual_contraction_with_zero_regularization() {
        // with rho = 0 and a full predictor step of length alpha, residuals
        // contract exactly by (1 - alpha)
        let a = CscMatrix::from_triplets(
            2,
            4,
            vec![
                (0, 0, 1.0),
                (0, 1, 2.0),
                (0, 3, -1.0),
                (1, 1, 1.0),
                (1, 2, 1.0),
            ],
        );
        let std = StandardLP::new(
            MatrixData::Csc(a),
            vec![2.0, 1.5],
            vec![1.0, -1.0, 0.5, 0.0],
        );
        let mut params = Parameters::<f64>::default();
        params.reg_initial = 0.0;
        params.reg_floor = 0.0;

        let mut it = Iterate::initialize(&std);
        // move to a generic strictly positive point
        it.x = vec![0.7, 1.3, 0.4, 2.0];
        it.s = vec![0.9, 0.2, 1.1, 0.6];
        it.y = vec![0.3, -0.8];
        it.tau = 1.2;
        it.kappa = 0.5;
        it.compute_residuals(&std);

        let mut kkt = kkt::setup(&std.a, Backend::SparseLdl).unwrap();
        let regs = Regularizations {
            rho_p: 0.0,
            rho_d: 0.0,
            rho_g: 0.0,
            consecutive_rescues: 0,
        };
        let ctx =
            NewtonContext::prepare(&std, it.point(), regs.rho_p, regs.rho_d, regs.rho_g, kkt.as_mut())
                .unwrap();
        let mut rhs = NewtonRhs::zero(4, 2, 0);
        rhs.xi_d.copy_from_slice(&it.res.rd);
        rhs.xi_p.copy_from_slice(&it.res.rp);
        rhs.xi_g = it.res.rg;
        for j in 0..4 {
            rhs.xi_xs[j] = -it.x[j] * it.s[j];
        }
        rhs.xi_tk = -it.tau * it.kappa;
        let dir = ctx.solve(&std, kkt.as_mut(), &rhs).unwrap();

        let rp0 = it.res.rp.clone();
        let rd0 = it.res.rd.clone();
        let rg0 = it.res.rg;
        let alpha = 0.37;
        it.take_step(&std, &dir, alpha);
        for i in 0..2 {
            assert!(
                (it.res.rp[i] - (1.0 - alpha) * rp0[i]).abs() <= 1e-10 * (1.0 + rp0[i].abs()),
                "rp contraction"
            );
        }
        for j in 0..4 {
            assert!(
                (it.res.rd[j] - (1.0 - alpha) * rd0[j]).abs() <= 1e-10 * (1.0 + rd0[j].abs()),
                "rd contraction"
            );
        }
        assert!((it.res.rg - (1.0 - alpha) * rg0).abs() <= 1e-10 * (1.0 + rg0.abs()));
    }

    #[test]
    fn predictor_direction_is_zero_at_complementary_optimum() {
        // x = (1, 0+), s = (0+, 1) at tau = 1, kappa -> 0 is optimal for
        // min x2 s.t. x1 + x2 = 1; at an exactly complementary point the
        // affine direction vanishes up to regularization
        let a = CscMatrix::from_triplets(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)]);
        let std = StandardLP::new(MatrixData::Csc(a), vec![1.0], vec![0.0, 1.0]);
        let mut it = Iterate::initialize(&std);
        let tiny = 1e-13;
        it.x = vec![1.0, tiny];
        it.s = vec![tiny, 1.0];
        it.y = vec![0.0];
        it.tau = 1.0;
        it.kappa = tiny;
        it.compute_residuals(&std);

        let mut kkt = kkt::setup(&std.a, Backend::SparseLdl).unwrap();
        let ctx = NewtonContext::prepare(&std, it.point(), 0.0, 0.0, 0.0, kkt.as_mut()).unwrap();
        let mut rhs = NewtonRhs::zero(2, 1, 0);
        rhs.xi_d.copy_from_slice(&it.res.rd);
        rhs.xi_p.copy_from_slice(&it.res.rp);
        rhs.xi_g = it.res.rg;
        for j in 0..2 {
            rhs.xi_xs[j] = -it.x[j] * it.s[j];
        }
        rhs.xi_tk = -it.tau * it.kappa;
        let dir = ctx.solve(&std, kkt.as_mut(), &rhs).unwrap();
        for v in dir.dx.iter().chain(dir.dy.iter()) {
            assert!(v.abs() < 1e-6, "direction should be near zero, got {v}");
        }
        assert!(dir.dtau.abs() < 1e-6);
    }

    #[test]
    fn mu_decreases_on_well_behaved_instance() {
        let a = CscMatrix::from_triplets(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)]);
        let std = StandardLP::new(MatrixData::Csc(a), vec![2.0], vec![1.0, 2.0]);
        let sol = solve(&std, &Parameters::default(), Backend::SparseLdl).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!(sol.stats.max_mu_uptick < 0.10, "uptick {}", sol.stats.max_mu_uptick);
        assert!((sol.objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn empty_problem_is_optimal() {
        let a = CscMatrix::from_triplets(0, 0, Vec::<(usize, usize, f64)>::new());
        let mut std = StandardLP::new(MatrixData::Csc(a), vec![], vec![]);
        std.c0 = 42.0;
        let sol = solve(&std, &Parameters::default(), Backend::SparseLdl).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.objective, 42.0);
    }

    #[test]
    fn self_dual_objective_identity() {
        // for any point satisfying the regularized KKT equalities exactly,
        // rho_p (x - xb)'x + rho_d (y - yb)'y + rho_g (tau - taub) tau
        //   = x's + tau kappa
        let mut rng = crate::test_rng(31);
        for _ in 0..20 {
            let n = 4;
            let m = 2;
            let mut trips = Vec::new();
            for i in 0..m {
                for j in 0..n {
                    trips.push((i, j, rng.next_unit() * 2.0 - 1.0));
                }
            }
            let a = CscMatrix::from_triplets(m, n, trips);
            let c: Vec<f64> = (0..n).map(|_| rng.next_unit() - 0.5).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.next_unit() - 0.5).collect();
            let (rho_p, rho_d, rho_g) = (0.3, 0.7, 0.2);

            let x: Vec<f64> = (0..n).map(|_| rng.next_unit() + 0.1).collect();
            let y: Vec<f64> = (0..m).map(|_| rng.next_unit() - 0.5).collect();
            let tau = rng.next_unit() + 0.1;
            let xb: Vec<f64> = (0..n).map(|_| rng.next_unit() - 0.5).collect();
            let taub = rng.next_unit() - 0.5;

            // choose s, kappa, yb so the three KKT equalities hold exactly
            let mut aty = vec![0.0; n];
            a.matvec_transpose(&y, &mut aty);
            let s: Vec<f64> = (0..n)
                .map(|j| -aty[j] + c[j] * tau + rho_p * (x[j] - xb[j]))
                .collect();
            let mut ax = vec![0.0; m];
            a.matvec(&x, &mut ax);
            let yb: Vec<f64> = (0..m).map(|i| y[i] - (b[i] * tau - ax[i]) / rho_d).collect();
            let ctx_x: f64 = c.iter().zip(&x).map(|(u, v)| u * v).sum();
            let bty: f64 = b.iter().zip(&y).map(|(u, v)| u * v).sum();
            let kappa = -ctx_x + bty + rho_g * (tau - taub);

            let lhs: f64 = rho_p
                * x.iter()
                    .zip(&xb)
                    .zip(&x)
                    .map(|((xi, xbi), xi2)| (xi - xbi) * xi2)
                    .sum::<f64>()
                + rho_d
                    * y.iter()
                        .zip(&yb)
                        .zip(&y)
                        .map(|((yi, ybi), yi2)| (yi - ybi) * yi2)
                        .sum::<f64>()
                + rho_g * (tau - taub) * tau;
            let rhs: f64 = x.iter().zip(&s).map(|(u, v)| u * v).sum::<f64>() + tau * kappa;
            assert!(
                (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs().max(rhs.abs())),
                "identity violated: {lhs} vs {rhs}"
            );
        }
    }
}
