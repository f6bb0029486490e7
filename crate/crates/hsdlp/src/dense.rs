//! Minimal dense kernels: a row-major matrix, an in-place LDL^T Cholesky for
//! symmetric positive definite systems, and an LU solve with partial
//! pivoting. These back the dense normal-equations KKT backend and the
//! block-angular Schur complement; everything is scalar-generic and sized
//! for desk-scale systems.

use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct DenseMatrix<S> {
    nrows: usize,
    ncols: usize,
    data: Vec<S>,
}

impl<S: Real> DenseMatrix<S> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            data: vec![S::zero(); nrows * ncols],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.ncols + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn fill_zero(&mut self) {
        for v in self.data.iter_mut() {
            *v = S::zero();
        }
    }

    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let row = self.row(i);
            let mut acc = S::zero();
            for (a, &xj) in row.iter().zip(x) {
                acc += *a * xj;
            }
            y[i] = acc;
        }
    }
}

/// In-place LDL^T of a symmetric positive definite matrix. Only the lower
/// triangle of `a` is read; on success the strict lower triangle holds L
/// (unit diagonal implied) and the diagonal holds D. Returns the pivot index
/// on a non-positive or non-finite pivot.
pub(crate) fn ldlt_in_place<S: Real>(a: &mut DenseMatrix<S>) -> Result<(), usize> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    for j in 0..n {
        let mut d = a.at(j, j);
        for k in 0..j {
            let l = a.at(j, k);
            d -= l * l * a.at(k, k);
        }
        if !(d > S::zero()) || !d.is_finite() {
            return Err(j);
        }
        *a.at_mut(j, j) = d;
        for i in (j + 1)..n {
            let mut v = a.at(i, j);
            for k in 0..j {
                v -= a.at(i, k) * a.at(j, k) * a.at(k, k);
            }
            *a.at_mut(i, j) = v / d;
        }
    }
    Ok(())
}

/// Solves with a factor produced by [`ldlt_in_place`].
pub(crate) fn ldlt_solve_in_place<S: Real>(f: &DenseMatrix<S>, b: &mut [S]) {
    let n = f.nrows();
    assert_eq!(b.len(), n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= f.at(i, k) * b[k];
        }
        b[i] = sum;
    }
    for i in 0..n {
        b[i] /= f.at(i, i);
    }
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in (i + 1)..n {
            sum -= f.at(k, i) * b[k];
        }
        b[i] = sum;
    }
}

/// Solves `A x = b` by LU with partial pivoting; `A` is copied. Returns
/// `None` when a pivot column is exactly zero.
pub(crate) fn lu_solve<S: Real>(a: &DenseMatrix<S>, b: &[S]) -> Option<Vec<S>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x: Vec<S> = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut piv = k;
        let mut best = m.at(perm[k], k).abs();
        for i in (k + 1)..n {
            let v = m.at(perm[i], k).abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == S::zero() || !best.is_finite() {
            return None;
        }
        perm.swap(k, piv);
        let pk = perm[k];
        let pivot = m.at(pk, k);
        for i in (k + 1)..n {
            let pi = perm[i];
            let factor = m.at(pi, k) / pivot;
            *m.at_mut(pi, k) = factor;
            for j in (k + 1)..n {
                let v = m.at(pk, j);
                *m.at_mut(pi, j) -= factor * v;
            }
            let xk = x[pk];
            x[pi] -= factor * xk;
        }
    }
    let mut out = vec![S::zero(); n];
    for k in (0..n).rev() {
        let pk = perm[k];
        let mut sum = x[pk];
        for j in (k + 1)..n {
            sum -= m.at(pk, j) * out[j];
        }
        out[k] = sum / m.at(pk, k);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd3() -> DenseMatrix<f64> {
        let mut a = DenseMatrix::zeros(3, 3);
        // A = M^T M + I for M = [[1,2,0],[0,1,1],[1,0,1]]
        let m = [[1.0, 2.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = if i == j { 1.0 } else { 0.0 };
                for k in 0..3 {
                    s += m[k][i] * m[k][j];
                }
                *a.at_mut(i, j) = s;
            }
        }
        a
    }

    #[test]
    fn ldlt_solves_spd_system() {
        let a = spd3();
        let mut f = a.clone();
        ldlt_in_place(&mut f).unwrap();
        let mut b = vec![1.0, 2.0, 3.0];
        let rhs = b.clone();
        ldlt_solve_in_place(&f, &mut b);
        let mut check = vec![0.0; 3];
        a.matvec(&b, &mut check);
        for i in 0..3 {
            assert!((check[i] - rhs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn ldlt_rejects_indefinite() {
        let mut a = DenseMatrix::zeros(2, 2);
        *a.at_mut(0, 0) = 1.0;
        *a.at_mut(1, 1) = -1.0;
        assert_eq!(ldlt_in_place(&mut a), Err(1));
    }

    #[test]
    fn lu_solves_general_system() {
        let mut a = DenseMatrix::zeros(3, 3);
        let vals = [[0.0, 2.0, 1.0], [1.0, -1.0, 0.0], [3.0, 0.0, -2.0]];
        for i in 0..3 {
            for j in 0..3 {
                *a.at_mut(i, j) = vals[i][j];
            }
        }
        let b = vec![3.0, 0.0, 1.0];
        let x = lu_solve(&a, &b).unwrap();
        let mut check = vec![0.0; 3];
        a.matvec(&x, &mut check);
        for i in 0..3 {
            assert!((check[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_detects_singular() {
        let mut a = DenseMatrix::zeros(2, 2);
        *a.at_mut(0, 0) = 1.0;
        *a.at_mut(0, 1) = 2.0;
        *a.at_mut(1, 0) = 2.0;
        *a.at_mut(1, 1) = 4.0;
        assert!(lu_solve(&a, &[1.0, 1.0]).is_none());
    }
}
