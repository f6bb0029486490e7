//! Linear-system backends behind the interior-point method.
//!
//! Every Newton system the algorithm solves reduces to the symmetric
//! quasi-definite *augmented system*
//!
//! ```text
//!     [ -(ThetaTilde^-1 + rho_p I)   A' ] [dx]   [xi_d]
//!     [  A                  rho_d I     ] [dy] = [xi_p]
//! ```
//!
//! and backends only ever see that shape. The contract is three entry
//! points: [`setup`] binds a backend to a matrix and performs symbolic
//! analysis once; [`KktSolver::update`] refreshes the numeric factorization
//! for a new diagonal and regularizations; [`KktSolver::solve`] may then be
//! called any number of times. Quasi-definiteness (guaranteed by positive
//! `rho_p`, `rho_d`) means the factorization exists for any symmetric
//! permutation and any `A`, including rank-deficient ones.
//!
//! [`NewtonContext`] performs the diagonal substitutions that fold the full
//! seven-block Newton system (bounds included) down to two augmented solves
//! plus scalar recovery of the tau component.

mod block;
mod dense;
mod ldl;
mod newton;

use thiserror::Error;

pub use block::BlockAngularKkt;
pub use dense::DenseNormalKkt;
pub use ldl::SparseLdlKkt;
pub use newton::{Direction, IteratePoint, NewtonContext, NewtonRhs};

use crate::matrix::MatrixData;
use crate::scalar::Real;
use crate::vecops;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KktError {
    #[error("the {backend} backend does not support this matrix representation")]
    UnsupportedMatrixKind { backend: &'static str },
    #[error("non-positive scaling entry at index {0}")]
    NonPositiveDiagonal(usize),
    #[error("non-positive regularization")]
    NonPositiveRegularization,
    #[error("numerical breakdown in {0}")]
    NumericalBreakdown(&'static str),
    #[error("tau recovery denominator is not positive")]
    DegenerateTau,
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("solve called before update")]
    NotUpdated,
}

/// Backend selection.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    /// LDL^T of the sparse augmented system (default).
    SparseLdl,
    /// Dense normal equations; oracle-grade, for small or dense problems.
    DenseNormal,
    /// Specialized Schur-complement factorization for unit block-angular
    /// matrices.
    BlockAngular,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::SparseLdl => "sparse-ldl",
            Backend::DenseNormal => "dense-normal",
            Backend::BlockAngular => "block-angular",
        }
    }
}

/// The three-function linear-solver contract. A solver is bound to one
/// matrix at [`setup`]; `update` refreshes its factorization; `solve`
/// answers augmented systems without mutating the factorization.
pub trait KktSolver<S: Real> {
    fn backend_name(&self) -> &'static str;

    /// `(rows, cols)` of the bound matrix.
    fn dims(&self) -> (usize, usize);

    /// Refresh the factorization for diagonal `theta_tilde` (> 0 elementwise)
    /// and regularizations `rho_p`, `rho_d` (> 0).
    fn update(&mut self, theta_tilde: &[S], rho_p: S, rho_d: S) -> Result<(), KktError>;

    /// Solve one augmented system. May be called repeatedly after `update`.
    fn solve(
        &mut self,
        xi_d: &[S],
        xi_p: &[S],
        dx: &mut [S],
        dy: &mut [S],
    ) -> Result<(), KktError>;

    /// Number of `solve` calls since setup (refinement steps not counted).
    fn solve_calls(&self) -> usize;
}

/// Instantiates a backend for the given matrix. Symbolic work (orderings,
/// buffer sizing) happens here, once.
pub fn setup<S: Real>(
    a: &MatrixData<S>,
    backend: Backend,
) -> Result<Box<dyn KktSolver<S>>, KktError> {
    match backend {
        Backend::SparseLdl => Ok(Box::new(SparseLdlKkt::setup(a)?)),
        Backend::DenseNormal => Ok(Box::new(DenseNormalKkt::setup(a)?)),
        Backend::BlockAngular => Ok(Box::new(BlockAngularKkt::setup(a)?)),
    }
}

/// Validates an `update` call's arguments against the contract.
pub(crate) fn check_update_args<S: Real>(
    n: usize,
    theta_tilde: &[S],
    rho_p: S,
    rho_d: S,
) -> Result<(), KktError> {
    if theta_tilde.len() != n {
        return Err(KktError::Dimension("theta length"));
    }
    for (j, &t) in theta_tilde.iter().enumerate() {
        if !(t > S::zero()) || !t.is_finite() {
            return Err(KktError::NonPositiveDiagonal(j));
        }
    }
    if !(rho_p >= S::zero()) || !(rho_d >= S::zero()) {
        return Err(KktError::NonPositiveRegularization);
    }
    Ok(())
}

/// Iterative refinement around a backend's raw solve: measures the
/// augmented-system residual and re-solves on it, at most twice, until the
/// residual is below `sqrt(eps)/2 * (1 + |xi|_inf)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn refine_augmented<S: Real>(
    matvec: &mut dyn FnMut(&[S], &mut [S]),
    matvec_t: &mut dyn FnMut(&[S], &mut [S]),
    diag: &[S],
    rho_d: S,
    solve_once: &mut dyn FnMut(&[S], &[S], &mut [S], &mut [S]) -> Result<(), KktError>,
    xi_d: &[S],
    xi_p: &[S],
    dx: &mut [S],
    dy: &mut [S],
) -> Result<(), KktError> {
    let n = xi_d.len();
    let m = xi_p.len();
    solve_once(xi_d, xi_p, dx, dy)?;

    let tol = S::epsilon().sqrt() * S::from_f64(0.5);
    let scale = S::one() + vecops::norm_inf(xi_d).max(vecops::norm_inf(xi_p));
    let mut res_d = vec![S::zero(); n];
    let mut res_p = vec![S::zero(); m];
    let mut cor_x = vec![S::zero(); n];
    let mut cor_y = vec![S::zero(); m];

    for _ in 0..2 {
        // res_d = xi_d - (-(diag) dx + A' dy); res_p = xi_p - (A dx + rho_d dy)
        matvec_t(dy, &mut res_d);
        for j in 0..n {
            res_d[j] = xi_d[j] - (res_d[j] - diag[j] * dx[j]);
        }
        matvec(dx, &mut res_p);
        for i in 0..m {
            res_p[i] = xi_p[i] - (res_p[i] + rho_d * dy[i]);
        }
        let res = vecops::norm_inf(&res_d).max(vecops::norm_inf(&res_p));
        if !res.is_finite() {
            return Err(KktError::NumericalBreakdown("refinement residual"));
        }
        if res <= tol * scale {
            break;
        }
        solve_once(&res_d, &res_p, &mut cor_x, &mut cor_y)?;
        vecops::axpy(S::one(), &cor_x, dx);
        vecops::axpy(S::one(), &cor_y, dy);
    }
    Ok(())
}
