//! KKT adapter for unit block-angular matrices.
//!
//! Plugs the specialized Schur-complement factorization into the standard
//! three-function contract by pivoting out the diagonal block of the
//! augmented system (the normal-equations route):
//!
//! ```text
//!     (A ThetaHat A' + rho_d I) dy = xi_p + A ThetaHat xi_d
//!     dx = ThetaHat (A' dy - xi_d)
//! ```

use crate::block_angular::{BlockAngularError, BlockAngularFactor, UnitBlockAngularMatrix};
use crate::kkt::{check_update_args, refine_augmented, KktError, KktSolver};
use crate::matrix::MatrixData;
use crate::scalar::Real;

pub struct BlockAngularKkt<S> {
    a: UnitBlockAngularMatrix<S>,
    factor: BlockAngularFactor<S>,
    theta_hat: Vec<S>,
    diag: Vec<S>,
    rho_d: S,
    scratch_n: Vec<S>,
    scratch_m: Vec<S>,
    updated: bool,
    solve_calls: usize,
}

impl<S: Real> BlockAngularKkt<S> {
    pub fn setup(matrix: &MatrixData<S>) -> Result<Self, KktError> {
        let a = match matrix {
            MatrixData::BlockAngular(a) => a.clone(),
            MatrixData::Csc(_) => {
                return Err(KktError::UnsupportedMatrixKind {
                    backend: "block-angular",
                })
            }
        };
        let factor = BlockAngularFactor::new(&a);
        let n = a.ncols();
        let m = a.nrows();
        Ok(BlockAngularKkt {
            a,
            factor,
            theta_hat: vec![S::zero(); n],
            diag: vec![S::zero(); n],
            rho_d: S::zero(),
            scratch_n: vec![S::zero(); n],
            scratch_m: vec![S::zero(); m],
            updated: false,
            solve_calls: 0,
        })
    }
}

impl<S: Real> KktSolver<S> for BlockAngularKkt<S> {
    fn backend_name(&self) -> &'static str {
        "block-angular"
    }

    fn dims(&self) -> (usize, usize) {
        (self.a.nrows(), self.a.ncols())
    }

    fn update(&mut self, theta_tilde: &[S], rho_p: S, rho_d: S) -> Result<(), KktError> {
        check_update_args(self.a.ncols(), theta_tilde, rho_p, rho_d)?;
        if !(rho_d > S::zero()) {
            // the Schur complement's positive definiteness rests on rho_d
            return Err(KktError::NonPositiveRegularization);
        }
        for (hat, &t) in self.theta_hat.iter_mut().zip(theta_tilde) {
            *hat = t / (S::one() + rho_p * t);
        }
        for (d, &t) in self.diag.iter_mut().zip(theta_tilde) {
            *d = (S::one() + rho_p * t) / t;
        }
        self.rho_d = rho_d;
        self.factor
            .factorize(&self.a, theta_tilde, rho_p, rho_d)
            .map_err(|e| match e {
                BlockAngularError::NumericalBreakdown(_) => {
                    KktError::NumericalBreakdown("schur pivot")
                }
                BlockAngularError::NonPositiveDiagonal(j) => KktError::NonPositiveDiagonal(j),
                _ => KktError::Dimension("block-angular factorize"),
            })?;
        self.updated = true;
        Ok(())
    }

    fn solve(
        &mut self,
        xi_d: &[S],
        xi_p: &[S],
        dx: &mut [S],
        dy: &mut [S],
    ) -> Result<(), KktError> {
        if !self.updated {
            return Err(KktError::NotUpdated);
        }
        let n = self.a.ncols();
        let m = self.a.nrows();
        if xi_d.len() != n || xi_p.len() != m {
            return Err(KktError::Dimension("rhs length"));
        }
        self.solve_calls += 1;

        let BlockAngularKkt {
            a,
            factor,
            theta_hat,
            diag,
            rho_d,
            scratch_n,
            scratch_m,
            ..
        } = self;
        refine_augmented(
            &mut |x: &[S], y: &mut [S]| a.matvec(x, y),
            &mut |x: &[S], y: &mut [S]| a.matvec_transpose(x, y),
            diag,
            *rho_d,
            &mut |rd: &[S], rp: &[S], ox: &mut [S], oy: &mut [S]| {
                for j in 0..n {
                    scratch_n[j] = theta_hat[j] * rd[j];
                }
                a.matvec(scratch_n, scratch_m);
                for i in 0..m {
                    scratch_m[i] += rp[i];
                }
                factor.solve_normal(scratch_m, oy);
                a.matvec_transpose(oy, ox);
                for j in 0..n {
                    ox[j] = theta_hat[j] * (ox[j] - rd[j]);
                }
                Ok(())
            },
            xi_d,
            xi_p,
            dx,
            dy,
        )
    }

    fn solve_calls(&self) -> usize {
        self.solve_calls
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn augmented_residual_small() {
        let mut rng = crate::test_rng(19);
        let mut a = UnitBlockAngularMatrix::new(3, 2);
        for r in 0..3 {
            for _ in 0..2 {
                let col: Vec<f64> = (0..2).map(|_| rng.next_unit() * 2.0 - 1.0).collect();
                a.push_block_column(r, &col).unwrap();
            }
        }
        a.push_linking_column(&[1.0, 0.0]).unwrap();
        let n = a.ncols();
        let m = a.nrows();
        let mut solver = BlockAngularKkt::setup(&MatrixData::BlockAngular(a.clone())).unwrap();
        let theta: Vec<f64> = (0..n).map(|_| 0.05 + rng.next_unit()).collect();
        let (rho_p, rho_d) = (1e-4, 1e-4);
        solver.update(&theta, rho_p, rho_d).unwrap();

        let xi_d: Vec<f64> = (0..n).map(|_| rng.next_unit() - 0.5).collect();
        let xi_p: Vec<f64> = (0..m).map(|_| rng.next_unit() - 0.5).collect();
        let mut dx = vec![0.0; n];
        let mut dy = vec![0.0; m];
        solver.solve(&xi_d, &xi_p, &mut dx, &mut dy).unwrap();

        let mut ax = vec![0.0; m];
        a.matvec(&dx, &mut ax);
        let mut aty = vec![0.0; n];
        a.matvec_transpose(&dy, &mut aty);
        for j in 0..n {
            let r = xi_d[j] - (-(1.0 / theta[j] + rho_p) * dx[j] + aty[j]);
            assert!(r.abs() < 1e-8, "dual residual {r}");
        }
        for i in 0..m {
            let r = xi_p[i] - (ax[i] + rho_d * dy[i]);
            assert!(r.abs() < 1e-8, "primal residual {r}");
        }

        // zero rhs -> zero
        solver
            .solve(&vec![0.0; n], &vec![0.0; m], &mut dx, &mut dy)
            .unwrap();
        assert!(dx.iter().all(|v| *v == 0.0));
        assert!(dy.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn adapter_requires_positive_rho_d() {
        let mut a = UnitBlockAngularMatrix::new(1, 1);
        a.push_block_column(0, &[1.0]).unwrap();
        let mut solver = BlockAngularKkt::setup(&MatrixData::BlockAngular(a)).unwrap();
        assert_eq!(
            solver.update(&[1.0], 0.0, 0.0),
            Err(KktError::NonPositiveRegularization)
        );
    }
}
