//! Reduction of the full Newton system to augmented solves.
//!
//! With upper bounds kept as a separate structure, one Newton step solves
//! the seven-block system
//!
//! ```text
//!     -rho_p dx          + A'dy + ds - U'dz - c dtau          = xi_d
//!      A dx   + rho_d dy                    - b dtau          = xi_p
//!      U dx   + dw                          - u dtau          = xi_u
//!     -c'dx              + b'dy      - u'dz + rho_g dtau - dk = xi_g
//!      S dx                     + X ds                        = xi_xs
//!              Z dw                  + W dz                   = xi_wz
//!                                      kappa dtau + tau dk    = xi_tk
//! ```
//!
//! Eliminating `ds`, `dk` (diagonal rows), then `dw`, `dz` (bound rows)
//! folds everything onto the `(dx, dy)` augmented system with the diagonal
//! `ThetaTilde = (X^-1 S + U'(W^-1 Z)U)^-1` and a modified tau column
//! `c_hat = c - U'(W^-1 Z)u`. Two augmented solves recover the direction:
//! the `(p, q)` pair for the right-hand side `(c_hat, b)` is independent of
//! the Newton right-hand side, so it is computed once per `update` and
//! reused by every solve of that iteration (predictor, corrector, each
//! centrality correction).
//!
//! The scalar recovery is
//!
//! ```text
//!     dtau = (xi_g + xi_tk/tau + g_hat'u0 - b'v0) / denom
//!     denom = rho_g + kappa/tau + u'(W^-1 Z)u - g_hat'p + b'q
//! ```
//!
//! with `g_hat = c + U'(W^-1 Z)u` and `(u0, v0)` the augmented solve of the
//! folded right-hand side. `denom` is strictly positive in exact arithmetic
//! (it equals `rho_g + kappa/tau` plus a sum of squares); a non-positive
//! value signals numerical breakdown and asks for a regularization rescue.
//! These formulas are derived, not copied: the dense seven-block oracle in
//! the test suite pins them down.

use crate::kkt::{KktError, KktSolver};
use crate::problem::StandardLP;
use crate::scalar::Real;
use crate::vecops;

/// Borrowed view of the current interior point.
#[derive(Copy, Clone)]
pub struct IteratePoint<'a, S> {
    pub x: &'a [S],
    /// Bound slacks, one per bounded column.
    pub w: &'a [S],
    pub s: &'a [S],
    /// Bound duals, one per bounded column.
    pub z: &'a [S],
    pub tau: S,
    pub kappa: S,
}

/// Right-hand side of the seven-block Newton system.
#[derive(Clone, Debug)]
pub struct NewtonRhs<S> {
    pub xi_d: Vec<S>,
    pub xi_p: Vec<S>,
    pub xi_u: Vec<S>,
    pub xi_g: S,
    pub xi_xs: Vec<S>,
    pub xi_wz: Vec<S>,
    pub xi_tk: S,
}

impl<S: Real> NewtonRhs<S> {
    pub fn zero(n: usize, m: usize, nb: usize) -> Self {
        NewtonRhs {
            xi_d: vec![S::zero(); n],
            xi_p: vec![S::zero(); m],
            xi_u: vec![S::zero(); nb],
            xi_g: S::zero(),
            xi_xs: vec![S::zero(); n],
            xi_wz: vec![S::zero(); nb],
            xi_tk: S::zero(),
        }
    }

    pub fn norm_inf(&self) -> S {
        let mut v = vecops::norm_inf(&self.xi_d);
        v = v.max(vecops::norm_inf(&self.xi_p));
        v = v.max(vecops::norm_inf(&self.xi_u));
        v = v.max(vecops::norm_inf(&self.xi_xs));
        v = v.max(vecops::norm_inf(&self.xi_wz));
        v = v.max(self.xi_g.abs()).max(self.xi_tk.abs());
        v
    }
}

/// Newton search direction.
#[derive(Clone, Debug)]
pub struct Direction<S> {
    pub dx: Vec<S>,
    pub dw: Vec<S>,
    pub dy: Vec<S>,
    pub ds: Vec<S>,
    pub dz: Vec<S>,
    pub dtau: S,
    pub dkappa: S,
}

impl<S: Real> Direction<S> {
    pub fn is_finite(&self) -> bool {
        vecops::all_finite(&self.dx)
            && vecops::all_finite(&self.dw)
            && vecops::all_finite(&self.dy)
            && vecops::all_finite(&self.ds)
            && vecops::all_finite(&self.dz)
            && self.dtau.is_finite()
            && self.dkappa.is_finite()
    }

    /// `self += other`, blockwise.
    pub fn add_assign(&mut self, other: &Direction<S>) {
        vecops::axpy(S::one(), &other.dx, &mut self.dx);
        vecops::axpy(S::one(), &other.dw, &mut self.dw);
        vecops::axpy(S::one(), &other.dy, &mut self.dy);
        vecops::axpy(S::one(), &other.ds, &mut self.ds);
        vecops::axpy(S::one(), &other.dz, &mut self.dz);
        self.dtau += other.dtau;
        self.dkappa += other.dkappa;
    }
}

/// Per-iteration state of the Newton reduction: the scaling diagonal, the
/// bound-folding data and the cached `(p, q)` solve.
pub struct NewtonContext<S> {
    // iterate snapshot
    x: Vec<S>,
    w: Vec<S>,
    s: Vec<S>,
    z: Vec<S>,
    tau: S,
    kappa: S,
    // bound structure
    bound_idx: Vec<usize>,
    bound_u: Vec<S>,
    /// `c + U'(W^-1 Z)u`, the gap-row coefficient vector.
    g_hat: Vec<S>,
    /// tau-recovery denominator.
    denom: S,
    p: Vec<S>,
    q: Vec<S>,
    theta_tilde: Vec<S>,
}

impl<S: Real> NewtonContext<S> {
    /// Computes `ThetaTilde`, refreshes the backend factorization and the
    /// cached `(p, q)` solve. This is the once-per-iteration step; the
    /// `(c_hat, b)` system is never solved again until the next `prepare`.
    pub fn prepare(
        std: &StandardLP<S>,
        point: IteratePoint<'_, S>,
        rho_p: S,
        rho_d: S,
        rho_g: S,
        kkt: &mut dyn KktSolver<S>,
    ) -> Result<Self, KktError> {
        let n = std.ncols();
        let m = std.nrows();
        let nb = std.nbounded();
        debug_assert_eq!(point.x.len(), n);
        debug_assert_eq!(point.w.len(), nb);

        let mut theta_inv: Vec<S> = (0..n).map(|j| point.s[j] / point.x[j]).collect();
        let mut wz_ratio = vec![S::zero(); nb];
        for k in 0..nb {
            let r = point.z[k] / point.w[k];
            wz_ratio[k] = r;
            theta_inv[std.upper.idx[k]] += r;
        }
        let theta_tilde: Vec<S> = theta_inv.iter().map(|&v| v.recip()).collect();

        // c_hat = c - U'(W^-1 Z)u and g_hat = c + U'(W^-1 Z)u
        let mut c_hat = std.c.clone();
        let mut g_hat = std.c.clone();
        let mut u_qu = S::zero();
        for k in 0..nb {
            let j = std.upper.idx[k];
            let qu = wz_ratio[k] * std.upper.val[k];
            c_hat[j] -= qu;
            g_hat[j] += qu;
            u_qu += std.upper.val[k] * qu;
        }

        kkt.update(&theta_tilde, rho_p, rho_d)?;

        let mut p = vec![S::zero(); n];
        let mut q = vec![S::zero(); m];
        kkt.solve(&c_hat, &std.b, &mut p, &mut q)?;

        let denom =
            rho_g + point.kappa / point.tau + u_qu - vecops::dot(&g_hat, &p) + vecops::dot(&std.b, &q);

        Ok(NewtonContext {
            x: point.x.to_vec(),
            w: point.w.to_vec(),
            s: point.s.to_vec(),
            z: point.z.to_vec(),
            tau: point.tau,
            kappa: point.kappa,
            bound_idx: std.upper.idx.clone(),
            bound_u: std.upper.val.clone(),
            g_hat,
            denom,
            p,
            q,
            theta_tilde,
        })
    }

    pub fn theta_tilde(&self) -> &[S] {
        &self.theta_tilde
    }

    /// Solves the seven-block system for the given right-hand side using
    /// one fresh augmented solve plus the cached `(p, q)`.
    pub fn solve(
        &self,
        std: &StandardLP<S>,
        kkt: &mut dyn KktSolver<S>,
        rhs: &NewtonRhs<S>,
    ) -> Result<Direction<S>, KktError> {
        let n = self.x.len();
        let m = std.nrows();
        let nb = self.bound_idx.len();

        // fold the diagonal rows into the dual right-hand side:
        // xi_d_tilde = xi_d - X^-1 xi_xs + U'[ (xi_wz - Z xi_u) / w ]
        let mut xi_d_tilde: Vec<S> = (0..n)
            .map(|j| rhs.xi_d[j] - rhs.xi_xs[j] / self.x[j])
            .collect();
        // and the folded bound contribution, reused in the gap row
        let mut u_fold = S::zero();
        for k in 0..nb {
            let j = self.bound_idx[k];
            let fold = (rhs.xi_wz[k] - self.z[k] * rhs.xi_u[k]) / self.w[k];
            xi_d_tilde[j] += fold;
            u_fold += self.bound_u[k] * fold;
        }

        let mut u0 = vec![S::zero(); n];
        let mut v0 = vec![S::zero(); m];
        kkt.solve(&xi_d_tilde, &rhs.xi_p, &mut u0, &mut v0)?;

        let numerator = rhs.xi_g
            + rhs.xi_tk / self.tau
            + u_fold
            + vecops::dot(&self.g_hat, &u0)
            - vecops::dot(&std.b, &v0);
        if !(self.denom > S::zero()) || !self.denom.is_finite() {
            return Err(KktError::DegenerateTau);
        }
        let dtau = numerator / self.denom;

        let mut dx = u0;
        vecops::axpy(dtau, &self.p, &mut dx);
        let mut dy = v0;
        vecops::axpy(dtau, &self.q, &mut dy);

        let mut dw = vec![S::zero(); nb];
        let mut dz = vec![S::zero(); nb];
        for k in 0..nb {
            let j = self.bound_idx[k];
            dw[k] = rhs.xi_u[k] - dx[j] + self.bound_u[k] * dtau;
            dz[k] = (rhs.xi_wz[k] - self.z[k] * dw[k]) / self.w[k];
        }
        let ds: Vec<S> = (0..n)
            .map(|j| (rhs.xi_xs[j] - self.s[j] * dx[j]) / self.x[j])
            .collect();
        let dkappa = (rhs.xi_tk - self.kappa * dtau) / self.tau;

        let dir = Direction {
            dx,
            dw,
            dy,
            ds,
            dz,
            dtau,
            dkappa,
        };
        if !dir.is_finite() {
            return Err(KktError::NumericalBreakdown("newton direction"));
        }
        Ok(dir)
    }
}
