use crate::kkt::{Direction, IteratePoint};
use crate::problem::StandardLP;
use crate::scalar::Real;
use crate::vecops;

/// Residuals of the homogeneous embedding at the current iterate:
///
/// ```text
///     r_p = b tau - A x
///     r_u = u tau - U x - w
///     r_d = c tau - A'y - s + U'z
///     r_g = c'x - b'y + u'z + kappa
/// ```
#[derive(Clone, Debug)]
pub struct Residuals<S> {
    pub rp: Vec<S>,
    pub ru: Vec<S>,
    pub rd: Vec<S>,
    pub rg: S,
    pub rp_inf: S,
    pub ru_inf: S,
    pub rd_inf: S,
}

/// Full primal-dual point of the homogeneous self-dual embedding, kept
/// strictly positive in `(x, w, s, z, tau, kappa)` throughout.
#[derive(Clone, Debug)]
pub struct Iterate<S> {
    pub x: Vec<S>,
    pub w: Vec<S>,
    pub y: Vec<S>,
    pub s: Vec<S>,
    pub z: Vec<S>,
    pub tau: S,
    pub kappa: S,
    pub res: Residuals<S>,
    pub mu: S,
}

impl<S: Real> Iterate<S> {
    /// Starting point `(x, y, s, tau, kappa) = (e, 0, e, 1, 1)`, bound
    /// blocks at `w = z = e`: every complementarity product equals one.
    pub fn initialize(std: &StandardLP<S>) -> Self {
        let n = std.ncols();
        let m = std.nrows();
        let nb = std.nbounded();
        let mut it = Iterate {
            x: vec![S::one(); n],
            w: vec![S::one(); nb],
            y: vec![S::zero(); m],
            s: vec![S::one(); n],
            z: vec![S::one(); nb],
            tau: S::one(),
            kappa: S::one(),
            res: Residuals {
                rp: vec![S::zero(); m],
                ru: vec![S::zero(); nb],
                rd: vec![S::zero(); n],
                rg: S::zero(),
                rp_inf: S::zero(),
                ru_inf: S::zero(),
                rd_inf: S::zero(),
            },
            mu: S::one(),
        };
        it.compute_residuals(std);
        it
    }

    pub fn point(&self) -> IteratePoint<'_, S> {
        IteratePoint {
            x: &self.x,
            w: &self.w,
            s: &self.s,
            z: &self.z,
            tau: self.tau,
            kappa: self.kappa,
        }
    }

    /// Recomputes residuals and the barrier parameter
    /// `mu = (x's + w'z + tau kappa) / (n + |I| + 1)`.
    pub fn compute_residuals(&mut self, std: &StandardLP<S>) {
        let n = std.ncols();
        let nb = std.nbounded();

        // r_p = b tau - A x
        std.a.matvec(&self.x, &mut self.res.rp);
        for (r, &bi) in self.res.rp.iter_mut().zip(&std.b) {
            *r = bi * self.tau - *r;
        }
        // r_u = u tau - U x - w
        for k in 0..nb {
            let j = std.upper.idx[k];
            self.res.ru[k] = std.upper.val[k] * self.tau - self.x[j] - self.w[k];
        }
        // r_d = c tau - A'y - s + U'z
        std.a.matvec_transpose(&self.y, &mut self.res.rd);
        for j in 0..n {
            self.res.rd[j] = std.c[j] * self.tau - self.res.rd[j] - self.s[j];
        }
        for k in 0..nb {
            self.res.rd[std.upper.idx[k]] += self.z[k];
        }
        // r_g = c'x - b'y + u'z + kappa
        self.res.rg = vecops::dot(&std.c, &self.x) - vecops::dot(&std.b, &self.y)
            + vecops::dot(&std.upper.val, &self.z)
            + self.kappa;

        self.res.rp_inf = vecops::norm_inf(&self.res.rp);
        self.res.ru_inf = vecops::norm_inf(&self.res.ru);
        self.res.rd_inf = vecops::norm_inf(&self.res.rd);

        let total = vecops::dot(&self.x, &self.s)
            + vecops::dot(&self.w, &self.z)
            + self.tau * self.kappa;
        self.mu = total / S::from_f64((n + nb + 1) as f64);
    }

    /// Primal objective value `c'x` (homogeneous, unscaled by tau).
    pub fn primal_obj(&self, std: &StandardLP<S>) -> S {
        vecops::dot(&std.c, &self.x)
    }

    /// Dual objective value `b'y - u'z` (homogeneous, unscaled by tau).
    pub fn dual_obj(&self, std: &StandardLP<S>) -> S {
        vecops::dot(&std.b, &self.y) - vecops::dot(&std.upper.val, &self.z)
    }

    pub fn strictly_positive(&self) -> bool {
        self.tau > S::zero()
            && self.kappa > S::zero()
            && self.x.iter().all(|v| *v > S::zero())
            && self.s.iter().all(|v| *v > S::zero())
            && self.w.iter().all(|v| *v > S::zero())
            && self.z.iter().all(|v| *v > S::zero())
    }

    /// Applies `point += alpha * dir` and refreshes residuals. Returns false
    /// if any positive block went negative (the ratio test plus damping make
    /// that impossible short of a bug). Exact underflow to zero is lifted to
    /// a floor far below every tolerance so late iterations past convergence
    /// stay finite.
    pub fn take_step(&mut self, std: &StandardLP<S>, dir: &Direction<S>, alpha: S) -> bool {
        vecops::axpy(alpha, &dir.dx, &mut self.x);
        vecops::axpy(alpha, &dir.dw, &mut self.w);
        vecops::axpy(alpha, &dir.dy, &mut self.y);
        vecops::axpy(alpha, &dir.ds, &mut self.s);
        vecops::axpy(alpha, &dir.dz, &mut self.z);
        self.tau += alpha * dir.dtau;
        self.kappa += alpha * dir.dkappa;

        let mut ok = true;
        let floor = S::tiny();
        let mut guard = |v: &mut S| {
            if *v < S::zero() {
                ok = false;
            }
            if *v < floor {
                *v = floor;
            }
        };
        for v in self.x.iter_mut() {
            guard(v);
        }
        for v in self.w.iter_mut() {
            guard(v);
        }
        for v in self.s.iter_mut() {
            guard(v);
        }
        for v in self.z.iter_mut() {
            guard(v);
        }
        guard(&mut self.tau);
        guard(&mut self.kappa);

        self.compute_residuals(std);
        ok
    }
}

/// Exact ratio test: the largest `alpha` in `[0, 1]` keeping
/// `(x, w, s, z, tau, kappa) + alpha * d` nonnegative.
pub fn max_step<S: Real>(it: &Iterate<S>, dir: &Direction<S>) -> S {
    let mut alpha = S::one();
    let mut block = |v: S, d: S| {
        if d < S::zero() {
            alpha = alpha.min(-v / d);
        }
    };
    for (&v, &d) in it.x.iter().zip(&dir.dx) {
        block(v, d);
    }
    for (&v, &d) in it.w.iter().zip(&dir.dw) {
        block(v, d);
    }
    for (&v, &d) in it.s.iter().zip(&dir.ds) {
        block(v, d);
    }
    for (&v, &d) in it.z.iter().zip(&dir.dz) {
        block(v, d);
    }
    block(it.tau, dir.dtau);
    block(it.kappa, dir.dkappa);
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixData;
    use crate::problem::BoundedCols;
    use crate::sparse::CscMatrix;

    fn std_no_bounds(n: usize) -> StandardLP<f64> {
        // one row summing all variables to n (so r_p = 0 at the start)
        let a = CscMatrix::from_triplets(1, n, (0..n).map(|j| (0, j, 1.0)).collect::<Vec<_>>());
        StandardLP::new(MatrixData::Csc(a), vec![n as f64], vec![1.0; n])
    }

    #[test]
    fn initial_mu_is_one() {
        let it = Iterate::initialize(&std_no_bounds(3));
        assert_eq!(it.mu, 1.0);

        // n=2 with one bounded variable: mu = (2 + 1 + 1)/4 = 1
        let a = CscMatrix::from_triplets(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)]);
        let mut std = StandardLP::new(MatrixData::Csc(a), vec![2.0], vec![1.0, 1.0]);
        std.upper = BoundedCols {
            idx: vec![0],
            val: vec![2.0],
        };
        let it = Iterate::initialize(&std);
        assert_eq!(it.mu, 1.0);
    }

    #[test]
    fn initial_residuals_match_definitions() {
        // b = A e makes r_p vanish; c = e makes r_d = c - s = 0 at the start
        let std = std_no_bounds(3);
        let it = Iterate::initialize(&std);
        assert_eq!(it.res.rp, vec![0.0]);
        assert_eq!(it.res.rd, vec![0.0, 0.0, 0.0]);
        // r_g = c'x - b'y + kappa = 3 - 0 + 1 = 4
        assert_eq!(it.res.rg, 4.0);
    }

    #[test]
    fn min_x_subject_to_x_eq_one_residuals() {
        // min x s.t. x = 1: at the start r_p = 1-1 = 0, r_d = 1-1 = 0,
        // r_g = c'x - b'y + kappa = 1 - 0 + 1 = 2
        let a = CscMatrix::from_triplets(1, 1, vec![(0, 0, 1.0)]);
        let std = StandardLP::new(MatrixData::Csc(a), vec![1.0], vec![1.0]);
        let it = Iterate::initialize(&std);
        assert_eq!(it.res.rp, vec![0.0]);
        assert_eq!(it.res.rd, vec![0.0]);
        assert_eq!(it.res.rg, 2.0);
    }

    fn zero_dir(n: usize, m: usize, nb: usize) -> Direction<f64> {
        Direction {
            dx: vec![0.0; n],
            dw: vec![0.0; nb],
            dy: vec![0.0; m],
            ds: vec![0.0; n],
            dz: vec![0.0; nb],
            dtau: 0.0,
            dkappa: 0.0,
        }
    }

    #[test]
    fn ratio_test_examples() {
        let std = std_no_bounds(3);
        let mut it = Iterate::initialize(&std);
        it.x = vec![1.0, 2.0, 3.0];

        let mut d = zero_dir(3, 1, 0);
        d.dx = vec![-2.0, 1.0, -1.0];
        assert_eq!(max_step(&it, &d), 0.5);

        // all nonnegative components -> full step
        let mut d = zero_dir(3, 1, 0);
        d.dx = vec![1.0, 0.0, 2.0];
        assert_eq!(max_step(&it, &d), 1.0);

        // dtau = -2 tau blocks at 0.5 regardless of the rest
        let mut d = zero_dir(3, 1, 0);
        d.dx = vec![5.0, 5.0, 5.0];
        d.dtau = -2.0 * it.tau;
        assert_eq!(max_step(&it, &d), 0.5);
    }

    #[test]
    fn bounded_residual_cross_check() {
        // residuals with bounds equal a direct dense evaluation
        let a = CscMatrix::from_triplets(2, 3, vec![(0, 0, 2.0), (0, 1, 1.0), (1, 2, -1.0)]);
        let mut std = StandardLP::new(
            MatrixData::Csc(a.clone()),
            vec![1.0, 0.5],
            vec![1.0, -1.0, 0.25],
        );
        std.upper = BoundedCols {
            idx: vec![0, 2],
            val: vec![2.0, 3.0],
        };
        let mut it = Iterate::initialize(&std);
        it.x = vec![0.5, 1.5, 0.75];
        it.y = vec![0.25, -0.5];
        it.s = vec![0.1, 0.2, 0.3];
        it.w = vec![1.0, 2.0];
        it.z = vec![0.4, 0.6];
        it.tau = 0.8;
        it.kappa = 0.9;
        it.compute_residuals(&std);

        let ad = a.to_dense();
        for i in 0..2 {
            let ax: f64 = (0..3).map(|j| ad[i][j] * it.x[j]).sum();
            assert!((it.res.rp[i] - (std.b[i] * it.tau - ax)).abs() < 1e-15);
        }
        for (k, &j) in std.upper.idx.iter().enumerate() {
            let expect = std.upper.val[k] * it.tau - it.x[j] - it.w[k];
            assert!((it.res.ru[k] - expect).abs() < 1e-15);
        }
        for j in 0..3 {
            let aty: f64 = (0..2).map(|i| ad[i][j] * it.y[i]).sum();
            let mut expect = std.c[j] * it.tau - aty - it.s[j];
            if let Some(k) = std.upper.idx.iter().position(|&jj| jj == j) {
                expect += it.z[k];
            }
            assert!((it.res.rd[j] - expect).abs() < 1e-15);
        }
        let expect_rg = (0..3).map(|j| std.c[j] * it.x[j]).sum::<f64>()
            - (0..2).map(|i| std.b[i] * it.y[i]).sum::<f64>()
            + it.z[0] * 2.0
            + it.z[1] * 3.0
            + it.kappa;
        assert!((it.res.rg - expect_rg).abs() < 1e-15);
    }
}
