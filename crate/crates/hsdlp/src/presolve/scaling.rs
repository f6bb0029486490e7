use crate::problem::GeneralLP;
use crate::scalar::Real;
use crate::sparse::CscMatrix;

/// Diagonal equilibration factors: `A_scaled = D_r A D_c` with
/// `D_r[i] = 1/sqrt(|row i|_2)` and `D_c[j] = 1/sqrt(|col j|_2)`, both
/// computed simultaneously from the unscaled matrix. One pass only.
#[derive(Clone, Debug)]
pub struct ScalingFactors<S> {
    pub row: Vec<S>,
    pub col: Vec<S>,
}

/// Scales a reduced problem; the input must have no empty rows or columns
/// (presolve guarantees this), so every factor is finite and positive.
pub fn scale<S: Real>(lp: &GeneralLP<S>) -> (GeneralLP<S>, ScalingFactors<S>) {
    let m = lp.nrows();
    let n = lp.ncols();
    let mut row_sq = vec![S::zero(); m];
    let mut col_sq = vec![S::zero(); n];
    for (i, j, v) in lp.a.iter() {
        row_sq[i] += v * v;
        col_sq[j] += v * v;
    }
    let factor = |sq: S| {
        if sq > S::zero() {
            sq.sqrt().sqrt().recip()
        } else {
            S::one()
        }
    };
    let row: Vec<S> = row_sq.into_iter().map(factor).collect();
    let col: Vec<S> = col_sq.into_iter().map(factor).collect();

    let a = CscMatrix::from_triplets(
        m,
        n,
        lp.a.iter().map(|(i, j, v)| (i, j, v * row[i] * col[j])),
    );
    let mut scaled = lp.clone();
    scaled.a = a;
    for i in 0..m {
        scaled.row_lb[i] = lp.row_lb[i].scale(row[i]);
        scaled.row_ub[i] = lp.row_ub[i].scale(row[i]);
    }
    for j in 0..n {
        // x_scaled = x / D_c, so bounds divide by the factor
        scaled.col_lb[j] = lp.col_lb[j].scale(col[j].recip());
        scaled.col_ub[j] = lp.col_ub[j].scale(col[j].recip());
        scaled.c[j] = lp.c[j] * col[j];
    }
    (scaled, ScalingFactors { row, col })
}

impl<S: Real> ScalingFactors<S> {
    /// Maps a scaled-space primal-dual point back: `x = D_c x~`,
    /// `y = D_r y~` (reduced costs follow as `s = s~ / D_c`, recomputed by
    /// the caller from unscaled data).
    pub fn unscale_point(&self, x: &mut [S], y: &mut [S]) {
        for (v, &f) in x.iter_mut().zip(&self.col) {
            *v *= f;
        }
        for (v, &f) in y.iter_mut().zip(&self.row) {
            *v *= f;
        }
    }

    pub fn unscale_primal_ray(&self, x: &mut [S]) {
        for (v, &f) in x.iter_mut().zip(&self.col) {
            *v *= f;
        }
    }

    pub fn unscale_dual_ray(&self, y: &mut [S]) {
        for (v, &f) in y.iter_mut().zip(&self.row) {
            *v *= f;
        }
    }
}
