//! Unit block-angular matrices and their specialized normal-equations
//! factorization.
//!
//! A Dantzig-Wolfe master problem has the constraint shape
//!
//! ```text
//!     [ e'                  0  ]      R convexity rows (one per block)
//!     [      e'             0  ]
//!     [           ...          ]
//!     [ A_1  A_2  ...  A_R  A_0 ]     m0 dense linking rows
//! ```
//!
//! with each `A_r` a dense `m0 x n_r` block. The normal-equations matrix
//! `A Theta A' + rho_d I` then splits into R scalar pivots, R dense rank-one
//! couplings and an `m0 x m0` Schur complement; the factorization below
//! computes exactly those pieces, never forming the normal matrix, with all
//! buffers sized once at construction.

use thiserror::Error;

use crate::dense::{ldlt_in_place, ldlt_solve_in_place, DenseMatrix};
use crate::scalar::Real;
use crate::sparse::CscMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlockAngularError {
    #[error("block index {0} out of range")]
    BlockIndex(usize),
    #[error("column has {got} linking coefficients, expected {expected}")]
    ColumnLength { got: usize, expected: usize },
    #[error("non-positive scaling entry at column {0}")]
    NonPositiveDiagonal(usize),
    #[error("negative regularization")]
    NegativeRegularization,
    #[error("numerical breakdown: non-positive Schur pivot at {0}")]
    NumericalBreakdown(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("instance format error: {0}")]
    Format(String),
}

/// Constraint matrix of a unit block-angular master problem. Columns are
/// ordered block 1, ..., block R, then the linking block; rows are the R
/// convexity rows followed by the m0 linking rows.
#[derive(Clone, Debug)]
pub struct UnitBlockAngularMatrix<S> {
    m0: usize,
    /// Per block: linking coefficients, column-major (each column is a
    /// contiguous slice of length m0).
    blocks: Vec<Vec<S>>,
    /// Linking block A0, column-major.
    linking: Vec<S>,
}

impl<S: Real> UnitBlockAngularMatrix<S> {
    pub fn new(r_blocks: usize, m0: usize) -> Self {
        UnitBlockAngularMatrix {
            m0,
            blocks: vec![Vec::new(); r_blocks],
            linking: Vec::new(),
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn block_ncols(&self, r: usize) -> usize {
        self.blocks[r].len() / self.m0.max(1)
    }

    pub fn linking_ncols(&self) -> usize {
        if self.m0 == 0 {
            0
        } else {
            self.linking.len() / self.m0
        }
    }

    pub fn nrows(&self) -> usize {
        self.n_blocks() + self.m0
    }

    pub fn ncols(&self) -> usize {
        let block_cols: usize = if self.m0 == 0 {
            0
        } else {
            self.blocks.iter().map(|b| b.len() / self.m0).sum()
        };
        block_cols + self.linking_ncols()
    }

    /// Structural nonzero count: one convexity entry per block column plus
    /// the nonzero dense coefficients.
    pub fn nnz(&self) -> usize {
        let mut count = 0;
        for b in &self.blocks {
            count += b.len() / self.m0.max(1);
            count += b.iter().filter(|v| **v != S::zero()).count();
        }
        count + self.linking.iter().filter(|v| **v != S::zero()).count()
    }

    /// Appends a column to block `r` with the given linking coefficients.
    pub fn push_block_column(&mut self, r: usize, coeffs: &[S]) -> Result<(), BlockAngularError> {
        if r >= self.blocks.len() {
            return Err(BlockAngularError::BlockIndex(r));
        }
        if coeffs.len() != self.m0 {
            return Err(BlockAngularError::ColumnLength {
                got: coeffs.len(),
                expected: self.m0,
            });
        }
        self.blocks[r].extend_from_slice(coeffs);
        Ok(())
    }

    /// Appends a convexity-exempt column (linking block).
    pub fn push_linking_column(&mut self, coeffs: &[S]) -> Result<(), BlockAngularError> {
        if coeffs.len() != self.m0 {
            return Err(BlockAngularError::ColumnLength {
                got: coeffs.len(),
                expected: self.m0,
            });
        }
        self.linking.extend_from_slice(coeffs);
        Ok(())
    }

    fn block_col(&self, r: usize, j: usize) -> &[S] {
        &self.blocks[r][j * self.m0..(j + 1) * self.m0]
    }

    fn linking_col(&self, j: usize) -> &[S] {
        &self.linking[j * self.m0..(j + 1) * self.m0]
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        assert_eq!(x.len(), self.ncols());
        assert_eq!(y.len(), self.nrows());
        let r_blocks = self.n_blocks();
        for v in y.iter_mut() {
            *v = S::zero();
        }
        let (conv, link) = y.split_at_mut(r_blocks);
        let mut offset = 0usize;
        for (r, block) in self.blocks.iter().enumerate() {
            let ncols = block.len() / self.m0.max(1);
            for j in 0..ncols {
                let xj = x[offset + j];
                conv[r] += xj;
                if xj != S::zero() {
                    for (acc, &a) in link.iter_mut().zip(self.block_col(r, j)) {
                        *acc += a * xj;
                    }
                }
            }
            offset += ncols;
        }
        for j in 0..self.linking_ncols() {
            let xj = x[offset + j];
            if xj != S::zero() {
                for (acc, &a) in link.iter_mut().zip(self.linking_col(j)) {
                    *acc += a * xj;
                }
            }
        }
    }

    /// `y = A^T x`
    pub fn matvec_transpose(&self, x: &[S], y: &mut [S]) {
        assert_eq!(x.len(), self.nrows());
        assert_eq!(y.len(), self.ncols());
        let r_blocks = self.n_blocks();
        let link = &x[r_blocks..];
        let mut offset = 0usize;
        for (r, block) in self.blocks.iter().enumerate() {
            let ncols = block.len() / self.m0.max(1);
            for j in 0..ncols {
                let mut acc = x[r];
                for (&a, &v) in self.block_col(r, j).iter().zip(link) {
                    acc += a * v;
                }
                y[offset + j] = acc;
            }
            offset += ncols;
        }
        for j in 0..self.linking_ncols() {
            let mut acc = S::zero();
            for (&a, &v) in self.linking_col(j).iter().zip(link) {
                acc += a * v;
            }
            y[offset + j] = acc;
        }
    }

    /// Materializes the full matrix as generic sparse storage.
    pub fn to_csc(&self) -> CscMatrix<S> {
        let mut triplets = Vec::new();
        let r_blocks = self.n_blocks();
        let mut offset = 0usize;
        for (r, block) in self.blocks.iter().enumerate() {
            let ncols = block.len() / self.m0.max(1);
            for j in 0..ncols {
                triplets.push((r, offset + j, S::one()));
                for (i, &a) in self.block_col(r, j).iter().enumerate() {
                    if a != S::zero() {
                        triplets.push((r_blocks + i, offset + j, a));
                    }
                }
            }
            offset += ncols;
        }
        for j in 0..self.linking_ncols() {
            for (i, &a) in self.linking_col(j).iter().enumerate() {
                if a != S::zero() {
                    triplets.push((r_blocks + i, offset + j, a));
                }
            }
        }
        CscMatrix::from_triplets(self.nrows(), self.ncols(), triplets)
    }
}

/// Factorization of the block-angular normal-equations matrix
/// `S = A ThetaHat A' + rho_d I` with `ThetaHat = (ThetaTilde^-1 + rho_p I)^-1`,
/// held as the scalar pivots `d_r`, the coupling columns `l_r` and the dense
/// Cholesky of the Schur complement. All buffers are sized at construction.
#[derive(Clone, Debug)]
pub struct BlockAngularFactor<S> {
    r_blocks: usize,
    m0: usize,
    d: Vec<S>,
    /// Coupling columns l_r, column-major (m0 per block).
    couplings: Vec<S>,
    /// Schur complement; overwritten by its LDL^T factor.
    schur: DenseMatrix<S>,
    /// Scratch vector of length m0.
    work: Vec<S>,
    factorized: bool,
}

impl<S: Real> BlockAngularFactor<S> {
    /// Allocates every buffer for a matrix of this shape; no allocation
    /// happens after this point.
    pub fn new(mtx: &UnitBlockAngularMatrix<S>) -> Self {
        let r = mtx.n_blocks();
        let m0 = mtx.m0();
        BlockAngularFactor {
            r_blocks: r,
            m0,
            d: vec![S::zero(); r],
            couplings: vec![S::zero(); r * m0],
            schur: DenseMatrix::zeros(m0, m0),
            work: vec![S::zero(); m0],
            factorized: false,
        }
    }

    pub fn d(&self) -> &[S] {
        &self.d
    }

    pub fn coupling(&self, r: usize) -> &[S] {
        &self.couplings[r * self.m0..(r + 1) * self.m0]
    }

    /// Refreshes the factorization for a new scaling diagonal and
    /// regularizations. `theta_tilde` must be strictly positive; `rho_p` and
    /// `rho_d` nonnegative (positive `rho_d` guarantees the Schur complement
    /// stays definite, otherwise a breakdown error may surface).
    pub fn factorize(
        &mut self,
        mtx: &UnitBlockAngularMatrix<S>,
        theta_tilde: &[S],
        rho_p: S,
        rho_d: S,
    ) -> Result<(), BlockAngularError> {
        if theta_tilde.len() != mtx.ncols() {
            return Err(BlockAngularError::Dimension("theta length"));
        }
        if rho_p < S::zero() || rho_d < S::zero() {
            return Err(BlockAngularError::NegativeRegularization);
        }
        let m0 = self.m0;
        self.factorized = false;
        self.schur.fill_zero();

        // theta_hat = theta / (1 + rho_p * theta), composed without forming
        // the reciprocal of theta
        let theta_hat = |t: S| t / (S::one() + rho_p * t);

        let mut offset = 0usize;
        for r in 0..self.r_blocks {
            let ncols = mtx.block_ncols(r);
            let mut d_r = rho_d;
            for w in self.work.iter_mut() {
                *w = S::zero();
            }
            for j in 0..ncols {
                let t = theta_tilde[offset + j];
                if !(t > S::zero()) || !t.is_finite() {
                    return Err(BlockAngularError::NonPositiveDiagonal(offset + j));
                }
                let th = theta_hat(t);
                d_r += th;
                let col = mtx.block_col(r, j);
                // Phi contribution: th * a a'
                for i in 0..m0 {
                    let ai = col[i];
                    if ai == S::zero() {
                        continue;
                    }
                    self.work[i] += th * ai;
                    let scaled = th * ai;
                    for k in 0..=i {
                        *self.schur.at_mut(i, k) += scaled * col[k];
                    }
                }
            }
            self.d[r] = d_r;
            // coupling column and symmetric downdate by (A_r theta_r)(...)'/d_r
            let inv_d = d_r.recip();
            for i in 0..m0 {
                let v_i = self.work[i];
                self.couplings[r * m0 + i] = v_i * inv_d;
                for k in 0..=i {
                    *self.schur.at_mut(i, k) -= v_i * self.work[k] * inv_d;
                }
            }
            offset += ncols;
        }
        // linking block contributes only to Phi
        for j in 0..mtx.linking_ncols() {
            let t = theta_tilde[offset + j];
            if !(t > S::zero()) || !t.is_finite() {
                return Err(BlockAngularError::NonPositiveDiagonal(offset + j));
            }
            let th = theta_hat(t);
            let col = mtx.linking_col(j);
            for i in 0..m0 {
                let ai = col[i];
                if ai == S::zero() {
                    continue;
                }
                let scaled = th * ai;
                for k in 0..=i {
                    *self.schur.at_mut(i, k) += scaled * col[k];
                }
            }
        }
        for i in 0..m0 {
            *self.schur.at_mut(i, i) += rho_d;
        }

        ldlt_in_place(&mut self.schur).map_err(BlockAngularError::NumericalBreakdown)?;
        self.factorized = true;
        Ok(())
    }

    /// Solves the normal-equations system `S delta = xi` using the current
    /// factorization. `xi` is ordered convexity rows first, then linking.
    pub fn solve_normal(&self, xi: &[S], delta: &mut [S]) {
        assert!(self.factorized, "solve_normal before factorize");
        assert_eq!(xi.len(), self.r_blocks + self.m0);
        assert_eq!(delta.len(), xi.len());
        let (xi_conv, xi_link) = xi.split_at(self.r_blocks);
        // forward: xi_0 - sum_r xi_r l_r
        let mut rhs: Vec<S> = xi_link.to_vec();
        for r in 0..self.r_blocks {
            let xr = xi_conv[r];
            if xr != S::zero() {
                for (acc, &l) in rhs.iter_mut().zip(self.coupling(r)) {
                    *acc -= xr * l;
                }
            }
        }
        ldlt_solve_in_place(&self.schur, &mut rhs);
        // back-substitute per block
        for r in 0..self.r_blocks {
            let mut acc = xi_conv[r] / self.d[r];
            for (&l, &d0) in self.coupling(r).iter().zip(rhs.iter()) {
                acc -= l * d0;
            }
            delta[r] = acc;
        }
        delta[self.r_blocks..].copy_from_slice(&rhs);
    }

    /// Rebuilds the dense normal matrix from the factor pieces
    /// (`L D L^T`); test aid for the factor-equality invariant.
    #[cfg(test)]
    fn reconstruct_normal(&self) -> DenseMatrix<S> {
        let n = self.r_blocks + self.m0;
        let m0 = self.m0;
        // reconstruct C from its LDL^T factor
        let mut c = DenseMatrix::zeros(m0, m0);
        for i in 0..m0 {
            for j in 0..m0 {
                let mut acc = S::zero();
                for k in 0..=i.min(j) {
                    let lik = if i == k { S::one() } else { self.schur.at(i, k) };
                    let ljk = if j == k { S::one() } else { self.schur.at(j, k) };
                    acc += lik * self.schur.at(k, k) * ljk;
                }
                *c.at_mut(i, j) = acc;
            }
        }
        let mut s = DenseMatrix::zeros(n, n);
        for r in 0..self.r_blocks {
            *s.at_mut(r, r) = self.d[r];
            for i in 0..m0 {
                let v = self.coupling(r)[i] * self.d[r];
                *s.at_mut(self.r_blocks + i, r) = v;
                *s.at_mut(r, self.r_blocks + i) = v;
            }
        }
        for i in 0..m0 {
            for j in 0..m0 {
                let mut acc = c.at(i, j);
                for r in 0..self.r_blocks {
                    acc += self.coupling(r)[i] * self.coupling(r)[j] * self.d[r];
                }
                *s.at_mut(self.r_blocks + i, self.r_blocks + j) = acc;
            }
        }
        s
    }
}

/// A master-problem instance: the structured matrix plus costs and linking
/// right-hand side (the convexity right-hand side is all ones by
/// construction). This is the on-disk fixture format for structured runs.
#[derive(Clone, Debug)]
pub struct MasterInstance<S> {
    pub matrix: UnitBlockAngularMatrix<S>,
    pub cost: Vec<S>,
    pub linking_rhs: Vec<S>,
}

impl<S: Real> MasterInstance<S> {
    /// Standard-form right-hand side `[e; b0]`.
    pub fn rhs(&self) -> Vec<S> {
        let mut b = vec![S::one(); self.matrix.n_blocks()];
        b.extend(self.linking_rhs.iter().copied());
        b
    }
}

/// Writes the textual instance format:
///
/// ```text
/// R m0 n0
/// n_1 ... n_R
/// <R blocks, each m0 lines of n_r values (row-major)>
/// <A0: m0 lines of n0 values>
/// <c: N values>
/// <b0: m0 values>
/// ```
///
/// `#` starts a comment; tokens may be split across lines arbitrarily.
pub fn write_instance<S: Real>(inst: &MasterInstance<S>) -> String {
    let mtx = &inst.matrix;
    let r = mtx.n_blocks();
    let m0 = mtx.m0();
    let n0 = mtx.linking_ncols();
    let mut out = String::new();
    out.push_str("# unit block-angular master instance\n");
    out.push_str(&format!("{} {} {}\n", r, m0, n0));
    let sizes: Vec<String> = (0..r).map(|k| mtx.block_ncols(k).to_string()).collect();
    out.push_str(&sizes.join(" "));
    out.push('\n');
    let fmt = |v: S| format!("{:e}", v.to_f64());
    for k in 0..r {
        out.push_str(&format!("# block {}\n", k + 1));
        for i in 0..m0 {
            let row: Vec<String> = (0..mtx.block_ncols(k))
                .map(|j| fmt(mtx.block_col(k, j)[i]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    if n0 > 0 {
        out.push_str("# linking block\n");
        for i in 0..m0 {
            let row: Vec<String> = (0..n0).map(|j| fmt(mtx.linking_col(j)[i])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out.push_str("# costs\n");
    let costs: Vec<String> = inst.cost.iter().map(|&v| fmt(v)).collect();
    out.push_str(&costs.join(" "));
    out.push('\n');
    out.push_str("# linking rhs\n");
    let rhs: Vec<String> = inst.linking_rhs.iter().map(|&v| fmt(v)).collect();
    out.push_str(&rhs.join(" "));
    out.push('\n');
    out
}

/// Parses the textual instance format written by [`write_instance`].
pub fn read_instance<S: Real>(text: &str) -> Result<MasterInstance<S>, BlockAngularError> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .into_iter();
    let mut next_usize = |what: &str| -> Result<usize, BlockAngularError> {
        tokens
            .next()
            .ok_or_else(|| BlockAngularError::Format(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|_| BlockAngularError::Format(format!("bad {what}")))
    };
    let r = next_usize("block count")?;
    let m0 = next_usize("linking row count")?;
    let n0 = next_usize("linking column count")?;
    let mut sizes = Vec::with_capacity(r);
    for k in 0..r {
        sizes.push(next_usize(&format!("size of block {k}"))?);
    }
    // re-wrap the remaining tokens as a value reader
    let rest: Vec<String> = tokens.collect();
    let mut vals = rest.into_iter();
    let mut next_val = |what: &str| -> Result<S, BlockAngularError> {
        vals.next()
            .ok_or_else(|| BlockAngularError::Format(format!("missing {what}")))?
            .parse::<f64>()
            .map(S::from_f64)
            .map_err(|_| BlockAngularError::Format(format!("bad {what}")))
    };

    let mut matrix = UnitBlockAngularMatrix::new(r, m0);
    for (k, &nk) in sizes.iter().enumerate() {
        // row-major on disk, column-major in memory
        let mut block = vec![S::zero(); m0 * nk];
        for i in 0..m0 {
            for j in 0..nk {
                block[j * m0 + i] = next_val("block entry")?;
            }
        }
        for j in 0..nk {
            matrix
                .push_block_column(k, &block[j * m0..(j + 1) * m0])
                .expect("sized above");
        }
    }
    let mut linking = vec![S::zero(); m0 * n0];
    for i in 0..m0 {
        for j in 0..n0 {
            linking[j * m0 + i] = next_val("linking entry")?;
        }
    }
    for j in 0..n0 {
        matrix
            .push_linking_column(&linking[j * m0..(j + 1) * m0])
            .expect("sized above");
    }
    let n = matrix.ncols();
    let mut cost = Vec::with_capacity(n);
    for _ in 0..n {
        cost.push(next_val("cost")?);
    }
    let mut linking_rhs = Vec::with_capacity(m0);
    for _ in 0..m0 {
        linking_rhs.push(next_val("rhs")?);
    }
    Ok(MasterInstance {
        matrix,
        cost,
        linking_rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::lu_solve;

    fn tiny() -> UnitBlockAngularMatrix<f64> {
        // R=1, m0=1, A1 = [[1, 2]], no linking block
        let mut m = UnitBlockAngularMatrix::new(1, 1);
        m.push_block_column(0, &[1.0]).unwrap();
        m.push_block_column(0, &[2.0]).unwrap();
        m
    }

    #[test]
    fn matvec_matches_structure() {
        let m = tiny();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m.ncols(), 2);
        let mut y = vec![0.0; 2];
        m.matvec(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![2.0, 3.0]);
        let mut z = vec![0.0; 2];
        m.matvec_transpose(&[1.0, 1.0], &mut z);
        assert_eq!(z, vec![2.0, 3.0]);
        m.matvec(&[0.0, 0.0], &mut y);
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn matvec_matches_dense_materialization() {
        let mut rng = crate::test_rng(7);
        let m = random_matrix(&mut rng, 4, 3, 2, 1.0);
        let dense = m.to_csc();
        let x: Vec<f64> = (0..m.ncols()).map(|_| rng.next_unit() - 0.5).collect();
        let mut y1 = vec![0.0; m.nrows()];
        let mut y2 = vec![0.0; m.nrows()];
        m.matvec(&x, &mut y1);
        dense.matvec(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() <= 1e-12);
        }
        let v: Vec<f64> = (0..m.nrows()).map(|_| rng.next_unit() - 0.5).collect();
        let mut t1 = vec![0.0; m.ncols()];
        let mut t2 = vec![0.0; m.ncols()];
        m.matvec_transpose(&v, &mut t1);
        dense.matvec_transpose(&v, &mut t2);
        for (a, b) in t1.iter().zip(&t2) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn factorize_hand_example() {
        // d1 = 2, A1 theta = 3, l1 = 1.5, Phi = 5, C = 0.5; S = [[2,3],[3,5]]
        let m = tiny();
        let mut f = BlockAngularFactor::new(&m);
        f.factorize(&m, &[1.0, 1.0], 0.0, 0.0).unwrap();
        assert!((f.d()[0] - 2.0).abs() < 1e-15);
        assert!((f.coupling(0)[0] - 1.5).abs() < 1e-15);
        // factored Schur of size 1 holds D = C = 0.5
        assert!((f.schur.at(0, 0) - 0.5).abs() < 1e-15);

        let mut delta = vec![0.0; 2];
        f.solve_normal(&[1.0, 1.0], &mut delta);
        assert!((delta[0] - 2.0).abs() < 1e-12);
        assert!((delta[1] + 1.0).abs() < 1e-12);
        // check S * delta = xi against the materialized S
        let s = f.reconstruct_normal();
        let mut check = vec![0.0; 2];
        s.matvec(&delta, &mut check);
        assert!((check[0] - 1.0).abs() < 1e-12);
        assert!((check[1] - 1.0).abs() < 1e-12);
        assert!((s.at(0, 0) - 2.0).abs() < 1e-12);
        assert!((s.at(1, 0) - 3.0).abs() < 1e-12);
        assert!((s.at(1, 1) - 5.0).abs() < 1e-12);

        // zero rhs -> zero solution
        f.solve_normal(&[0.0, 0.0], &mut delta);
        assert_eq!(delta, vec![0.0, 0.0]);
    }

    #[test]
    fn regularized_factorization_is_spd() {
        let mut m = UnitBlockAngularMatrix::new(2, 2);
        // identical columns make the unregularized Schur complement singular
        m.push_block_column(0, &[1.0, 1.0]).unwrap();
        m.push_block_column(1, &[1.0, 1.0]).unwrap();
        let theta = vec![1.0, 1.0];
        let mut f = BlockAngularFactor::new(&m);
        f.factorize(&m, &theta, 0.0, 1.0).unwrap();
        assert!(f.factorized);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = tiny();
        let mut f = BlockAngularFactor::new(&m);
        assert_eq!(
            f.factorize(&m, &[1.0, 0.0], 0.0, 1.0),
            Err(BlockAngularError::NonPositiveDiagonal(1))
        );
        assert_eq!(
            f.factorize(&m, &[1.0, 1.0], -1.0, 1.0),
            Err(BlockAngularError::NegativeRegularization)
        );
        assert_eq!(
            f.factorize(&m, &[1.0], 0.0, 1.0),
            Err(BlockAngularError::Dimension("theta length"))
        );
    }

    /// Deterministic random instance used across the test suite.
    pub(crate) fn random_matrix(
        rng: &mut crate::TestRng,
        r: usize,
        m0: usize,
        cols_per_block: usize,
        density: f64,
    ) -> UnitBlockAngularMatrix<f64> {
        let mut m = UnitBlockAngularMatrix::new(r, m0);
        for block in 0..r {
            for _ in 0..cols_per_block {
                let col: Vec<f64> = (0..m0)
                    .map(|_| {
                        if rng.next_unit() < density {
                            rng.next_unit() * 2.0 - 1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                m.push_block_column(block, &col).unwrap();
            }
        }
        m
    }

    #[test]
    fn factor_matches_dense_normal_oracle() {
        let mut rng = crate::test_rng(42);
        for _ in 0..5 {
            let r = 4;
            let m0 = 3;
            let m = random_matrix(&mut rng, r, m0, 3, 1.0);
            let n = m.ncols();
            let theta: Vec<f64> = (0..n).map(|_| 0.1 + rng.next_unit()).collect();
            let (rho_p, rho_d) = (0.01, 0.1);
            let mut f = BlockAngularFactor::new(&m);
            f.factorize(&m, &theta, rho_p, rho_d).unwrap();

            // dense oracle: S = A theta_hat A' + rho_d I
            let a = m.to_csc().to_dense();
            let big = r + m0;
            let mut s = DenseMatrix::zeros(big, big);
            for i in 0..big {
                for j in 0..big {
                    let mut acc = if i == j { rho_d } else { 0.0 };
                    for (k, &t) in theta.iter().enumerate() {
                        let th = t / (1.0 + rho_p * t);
                        acc += a[i][k] * th * a[j][k];
                    }
                    *s.at_mut(i, j) = acc;
                }
            }
            // factor equality
            let rec = f.reconstruct_normal();
            for i in 0..big {
                for j in 0..big {
                    assert!(
                        (rec.at(i, j) - s.at(i, j)).abs() <= 1e-10 * (1.0 + s.at(i, j).abs()),
                        "factor mismatch at ({i},{j})"
                    );
                }
            }
            // solve equality
            let xi: Vec<f64> = (0..big).map(|_| rng.next_unit() - 0.5).collect();
            let mut delta = vec![0.0; big];
            f.solve_normal(&xi, &mut delta);
            let oracle = lu_solve(&s, &xi).unwrap();
            for (d, o) in delta.iter().zip(&oracle) {
                assert!((d - o).abs() <= 1e-9 * (1.0 + o.abs()));
            }
        }
    }

    #[test]
    fn instance_round_trip() {
        let mut rng = crate::test_rng(3);
        let matrix = random_matrix(&mut rng, 3, 2, 2, 0.8);
        let n = matrix.ncols();
        let inst = MasterInstance {
            matrix,
            cost: (0..n).map(|_| rng.next_unit()).collect(),
            linking_rhs: vec![1.5, -0.25],
        };
        let text = write_instance(&inst);
        let back: MasterInstance<f64> = read_instance(&text).unwrap();
        assert_eq!(back.matrix.n_blocks(), 3);
        assert_eq!(back.matrix.ncols(), n);
        for j in 0..n {
            assert!((back.cost[j] - inst.cost[j]).abs() < 1e-15);
        }
        let x: Vec<f64> = (0..n).map(|_| rng.next_unit()).collect();
        let mut y1 = vec![0.0; inst.matrix.nrows()];
        let mut y2 = vec![0.0; inst.matrix.nrows()];
        inst.matrix.matvec(&x, &mut y1);
        back.matrix.matvec(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(back.rhs()[..3], [1.0, 1.0, 1.0]);
    }

    #[test]
    fn bad_instance_text_errors() {
        assert!(matches!(
            read_instance::<f64>("2 1"),
            Err(BlockAngularError::Format(_))
        ));
        assert!(matches!(
            read_instance::<f64>("1 1 0\n1\nnot_a_number 1 1"),
            Err(BlockAngularError::Format(_))
        ));
    }
}
