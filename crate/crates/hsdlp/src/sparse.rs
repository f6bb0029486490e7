//! Compressed sparse column matrices.
//!
//! This is the crate's generic constraint-matrix storage: just enough CSC to
//! support the solver (construction from triplets, products with the matrix
//! and its transpose, column access). Entries within a column are kept sorted
//! by row and duplicates are summed at construction.

use crate::scalar::Real;

/// Sparse matrix in compressed sparse column format.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix<S> {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Real> CscMatrix<S> {
    /// Builds from `(row, col, value)` triplets; duplicate positions are
    /// summed, exact zeros are kept out of the structure.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, S)>,
    ) -> Self {
        let mut entries: Vec<(usize, usize, S)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
        }
        entries.sort_by_key(|&(r, c, _)| (c, r));

        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<S> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((c, r)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((c, r));
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut m = CscMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        let mut write = 0usize;
        let mut new_ptr = vec![0usize; self.ncols + 1];
        for c in 0..self.ncols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                if self.values[k] != S::zero() {
                    self.row_idx[write] = self.row_idx[k];
                    self.values[write] = self.values[k];
                    write += 1;
                }
            }
            new_ptr[c + 1] = write;
        }
        self.row_idx.truncate(write);
        self.values.truncate(write);
        self.col_ptr = new_ptr;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[S]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    /// Iterates all entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, j, v))
        })
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for v in y.iter_mut() {
            *v = S::zero();
        }
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == S::zero() {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&r, &a) in rows.iter().zip(vals) {
                y[r] += a * xj;
            }
        }
    }

    /// `y = A^T x`
    pub fn matvec_transpose(&self, x: &[S], y: &mut [S]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for (j, v) in y.iter_mut().enumerate() {
            let (rows, vals) = self.col(j);
            let mut acc = S::zero();
            for (&r, &a) in rows.iter().zip(vals) {
                acc += a * x[r];
            }
            *v = acc;
        }
    }

    /// Transposed copy (used to get row-wise access).
    pub fn transpose(&self) -> CscMatrix<S> {
        CscMatrix::from_triplets(
            self.ncols,
            self.nrows,
            self.iter().map(|(r, c, v)| (c, r, v)),
        )
    }

    /// Dense materialization in row-major order; test and oracle helper.
    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let mut d = vec![vec![S::zero(); self.ncols]; self.nrows];
        for (r, c, v) in self.iter() {
            d[r][c] += v;
        }
        d
    }

    /// Converts every value through `f64` into another scalar type.
    pub fn cast<T: Real>(&self) -> CscMatrix<T> {
        CscMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            col_ptr: self.col_ptr.clone(),
            row_idx: self.row_idx.clone(),
            values: self.values.iter().map(|v| T::from_f64(v.to_f64())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_and_products() {
        // [[1, 0, 2],
        //  [0, 3, 0]]
        let a = CscMatrix::from_triplets(
            2,
            3,
            vec![(0, 0, 1.0), (1, 1, 3.0), (0, 2, 2.0)],
        );
        assert_eq!(a.nnz(), 3);
        let mut y = vec![0.0; 2];
        a.matvec(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 3.0]);
        let mut z = vec![0.0; 3];
        a.matvec_transpose(&[1.0, 2.0], &mut z);
        assert_eq!(z, vec![1.0, 6.0, 2.0]);

        let t = a.transpose();
        assert_eq!(t.nrows(), 3);
        assert_eq!(t.to_dense(), vec![vec![1.0, 0.0], vec![0.0, 3.0], vec![2.0, 0.0]]);
    }

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let a = CscMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 0.0), (1, 0, 5.0)],
        );
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.to_dense(), vec![vec![3.0, 0.0], vec![5.0, 0.0]]);
        let (rows, vals) = a.col(0);
        assert_eq!(rows, &[0, 1]);
        assert_eq!(vals, &[3.0, 5.0]);
    }

    #[test]
    fn empty_columns() {
        let a = CscMatrix::<f64>::from_triplets(3, 4, vec![(2, 3, 1.0)]);
        assert_eq!(a.col(0).0.len(), 0);
        assert_eq!(a.col(3).0, &[2]);
    }
}
