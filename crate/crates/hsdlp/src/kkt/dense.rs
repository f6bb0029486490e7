//! Dense normal-equations backend.
//!
//! Forms `S = A ThetaHat A' + rho_d I` with
//! `ThetaHat = (ThetaTilde^-1 + rho_p I)^-1`, Cholesky-factorizes it and
//! recovers `dx` from `dy`. Quadratic storage in the row count makes this
//! the reference backend for small problems and the oracle side of
//! cross-backend tests; it rejects structured matrices.

use crate::dense::{ldlt_in_place, ldlt_solve_in_place, DenseMatrix};
use crate::kkt::{check_update_args, refine_augmented, KktError, KktSolver};
use crate::matrix::MatrixData;
use crate::scalar::Real;
use crate::sparse::CscMatrix;

pub struct DenseNormalKkt<S> {
    a: CscMatrix<S>,
    n: usize,
    m: usize,
    theta_hat: Vec<S>,
    diag: Vec<S>,
    rho_d: S,
    normal: DenseMatrix<S>,
    scratch_n: Vec<S>,
    scratch_m: Vec<S>,
    updated: bool,
    solve_calls: usize,
}

impl<S: Real> DenseNormalKkt<S> {
    pub fn setup(matrix: &MatrixData<S>) -> Result<Self, KktError> {
        let a = match matrix {
            MatrixData::Csc(a) => a.clone(),
            MatrixData::BlockAngular(_) => {
                return Err(KktError::UnsupportedMatrixKind {
                    backend: "dense-normal",
                })
            }
        };
        let n = a.ncols();
        let m = a.nrows();
        Ok(DenseNormalKkt {
            a,
            n,
            m,
            theta_hat: vec![S::zero(); n],
            diag: vec![S::zero(); n],
            rho_d: S::zero(),
            normal: DenseMatrix::zeros(m, m),
            scratch_n: vec![S::zero(); n],
            scratch_m: vec![S::zero(); m],
            updated: false,
            solve_calls: 0,
        })
    }

    /// Normal-equations route: `(A ThetaHat A' + rho_d I) dy = xi_p + A ThetaHat xi_d`,
    /// then `dx = ThetaHat (A' dy - xi_d)`.
    fn solve_normal(&mut self, xi_d: &[S], xi_p: &[S], dx: &mut [S], dy: &mut [S]) {
        for j in 0..self.n {
            self.scratch_n[j] = self.theta_hat[j] * xi_d[j];
        }
        self.a.matvec(&self.scratch_n, &mut self.scratch_m);
        for i in 0..self.m {
            dy[i] = xi_p[i] + self.scratch_m[i];
        }
        ldlt_solve_in_place(&self.normal, dy);
        self.a.matvec_transpose(dy, dx);
        for j in 0..self.n {
            dx[j] = self.theta_hat[j] * (dx[j] - xi_d[j]);
        }
    }
}

impl<S: Real> KktSolver<S> for DenseNormalKkt<S> {
    fn backend_name(&self) -> &'static str {
        "dense-normal"
    }

    fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn update(&mut self, theta_tilde: &[S], rho_p: S, rho_d: S) -> Result<(), KktError> {
        check_update_args(self.n, theta_tilde, rho_p, rho_d)?;
        for j in 0..self.n {
            let t = theta_tilde[j];
            self.theta_hat[j] = t / (S::one() + rho_p * t);
            self.diag[j] = (S::one() + rho_p * t) / t;
        }
        self.rho_d = rho_d;
        self.normal.fill_zero();
        for j in 0..self.n {
            let th = self.theta_hat[j];
            let (rows, vals) = self.a.col(j);
            for (idx_a, (&ra, &va)) in rows.iter().zip(vals).enumerate() {
                let scaled = th * va;
                for (&rb, &vb) in rows.iter().zip(vals).take(idx_a + 1) {
                    // lower triangle accumulation (ra >= rb by CSC ordering)
                    *self.normal.at_mut(ra, rb) += scaled * vb;
                }
            }
        }
        for i in 0..self.m {
            *self.normal.at_mut(i, i) += rho_d;
        }
        ldlt_in_place(&mut self.normal)
            .map_err(|_| KktError::NumericalBreakdown("normal-equations pivot"))?;
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
        if xi_d.len() != self.n || xi_p.len() != self.m {
            return Err(KktError::Dimension("rhs length"));
        }
        self.solve_calls += 1;

        // the refinement helper needs simultaneous access to the matrix and
        // the factored solve; clone the small handles it reads
        let a = self.a.clone();
        let diag = self.diag.clone();
        let rho_d = self.rho_d;
        refine_augmented(
            &mut |x: &[S], y: &mut [S]| a.matvec(x, y),
            &mut |x: &[S], y: &mut [S]| a.matvec_transpose(x, y),
            &diag,
            rho_d,
            &mut |rd: &[S], rp: &[S], ox: &mut [S], oy: &mut [S]| {
                self.solve_normal(rd, rp, ox, oy);
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
    fn normal_matrix_lower_triangle_is_correct() {
        // A = [[1, 2], [0, 3]], theta = (1, 1), rho_p = 0, rho_d = 0.5
        // S = A A' + 0.5 I = [[5.5, 6], [6, 9.5]]
        let a = CscMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let mut k = DenseNormalKkt::setup(&MatrixData::Csc(a)).unwrap();
        k.update(&[1.0, 1.0], 0.0, 0.5).unwrap();
        let (d1, l21) = (5.5, 6.0 / 5.5);
        let d2 = 9.5 - l21 * l21 * d1;
        assert!((k.normal.at(0, 0) - d1).abs() < 1e-12);
        assert!((k.normal.at(1, 0) - l21).abs() < 1e-12);
        assert!((k.normal.at(1, 1) - d2).abs() < 1e-12);
    }
}
