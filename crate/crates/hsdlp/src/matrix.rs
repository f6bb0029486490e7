//! Constraint-matrix abstraction.
//!
//! The interior-point algorithm never looks inside the constraint matrix; it
//! only multiplies by `A` and `A^T` and hands the matrix to a KKT backend.
//! [`MatrixData`] is the dispatch point: generic sparse storage, or the
//! structured unit block-angular representation that the specialized
//! factorization exploits.

use crate::block_angular::UnitBlockAngularMatrix;
use crate::scalar::Real;
use crate::sparse::CscMatrix;

/// Concrete representation of a constraint matrix.
#[derive(Clone, Debug)]
pub enum MatrixData<S> {
    Csc(CscMatrix<S>),
    BlockAngular(UnitBlockAngularMatrix<S>),
}

impl<S: Real> MatrixData<S> {
    pub fn nrows(&self) -> usize {
        match self {
            MatrixData::Csc(a) => a.nrows(),
            MatrixData::BlockAngular(a) => a.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            MatrixData::Csc(a) => a.ncols(),
            MatrixData::BlockAngular(a) => a.ncols(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            MatrixData::Csc(a) => a.nnz(),
            MatrixData::BlockAngular(a) => a.nnz(),
        }
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        match self {
            MatrixData::Csc(a) => a.matvec(x, y),
            MatrixData::BlockAngular(a) => a.matvec(x, y),
        }
    }

    /// `y = A^T x`
    pub fn matvec_transpose(&self, x: &[S], y: &mut [S]) {
        match self {
            MatrixData::Csc(a) => a.matvec_transpose(x, y),
            MatrixData::BlockAngular(a) => a.matvec_transpose(x, y),
        }
    }

    /// Generic sparse view; materializes structured matrices.
    pub fn to_csc(&self) -> CscMatrix<S> {
        match self {
            MatrixData::Csc(a) => a.clone(),
            MatrixData::BlockAngular(a) => a.to_csc(),
        }
    }

    pub fn as_block_angular(&self) -> Option<&UnitBlockAngularMatrix<S>> {
        match self {
            MatrixData::BlockAngular(a) => Some(a),
            _ => None,
        }
    }
}
