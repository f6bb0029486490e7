//! A linear-programming solver built around a regularized homogeneous
//! self-dual interior-point method.
//!
//! The pieces, bottom to top:
//!
//! * [`problem`] — the two-sided LP form, validation, standard-form
//!   conversion and solution mapping;
//! * [`mps`] — free-format MPS reading and solution writing;
//! * [`presolve`] — fill-in-free reductions, postsolve, scaling;
//! * [`kkt`] — the three-function linear-solver contract (setup / update /
//!   solve) with sparse LDL^T and dense normal-equations backends;
//! * [`block_angular`] — structured matrices for Dantzig-Wolfe master
//!   problems and their specialized Schur-complement factorization;
//! * [`ipm`] — the interior-point driver: predictor-corrector with
//!   centrality corrections, primal-dual regularization, homogeneous
//!   infeasibility certificates;
//! * [`colgen`] — a column-generation loop over pluggable pricing oracles.
//!
//! Everything numeric is generic over [`scalar::Real`], so the same solver
//! runs in `f64` or in the bundled double-double arithmetic ([`dd`]).
//!
//! ```
//! use hsdlp::problem::{to_standard_form, uncrush, Bound, GeneralLP};
//! use hsdlp::sparse::CscMatrix;
//! use hsdlp::ipm::{solve, Parameters};
//! use hsdlp::kkt::Backend;
//!
//! // min -x - 2y  s.t.  x + y <= 4,  x - y >= -2,  0 <= x, y <= 3
//! let a = CscMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)]);
//! let mut lp = GeneralLP::new(a, vec![-1.0, -2.0]);
//! lp.row_ub[0] = Bound::Finite(4.0);
//! lp.row_lb[1] = Bound::Finite(-2.0);
//! lp.col_ub = vec![Bound::Finite(3.0), Bound::Finite(3.0)];
//!
//! let (std_lp, map) = to_standard_form(&lp).unwrap();
//! let sol = solve(&std_lp, &Parameters::default(), Backend::SparseLdl).unwrap();
//! let sol = uncrush(&lp, &map, &sol).unwrap();
//! assert!((sol.objective - (-7.0)).abs() < 1e-6);
//! ```

pub mod block_angular;
pub mod dd;
pub mod ipm;
pub mod kkt;
pub mod matrix;
pub mod mps;
pub mod pipeline;
pub mod presolve;
pub mod problem;
pub mod scalar;
pub mod sparse;

pub(crate) mod dense;
pub(crate) mod vecops;

/// Deterministic xorshift generator for unit tests; keeps expected values
/// reproducible without pulling RNG state through the public API.
#[cfg(test)]
pub(crate) struct TestRng(u64);

#[cfg(test)]
pub(crate) fn test_rng(seed: u64) -> TestRng {
    TestRng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
}

#[cfg(test)]
impl TestRng {
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in `[0, n)`.
    pub fn next_below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
