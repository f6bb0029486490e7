//! Small vector helpers shared by the numeric modules.

use crate::scalar::Real;

pub(crate) fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

pub(crate) fn norm_inf<S: Real>(a: &[S]) -> S {
    let mut m = S::zero();
    for &x in a {
        m = m.max(x.abs());
    }
    m
}

pub(crate) fn norm2<S: Real>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub(crate) fn axpy<S: Real>(alpha: S, x: &[S], y: &mut [S]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn fill<S: Real>(v: &mut [S], value: S) {
    for x in v.iter_mut() {
        *x = value;
    }
}

pub(crate) fn all_finite<S: Real>(a: &[S]) -> bool {
    a.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        let a = [1.0, -2.0, 3.0];
        let b = [4.0, 5.0, 6.0];
        assert_eq!(dot(&a, &b), 12.0);
        assert_eq!(norm_inf(&a), 3.0);
        assert!((norm2(&[3.0, 4.0]) - 5.0f64).abs() < 1e-15);
        let mut y = [1.0, 1.0, 1.0];
        axpy(2.0, &a, &mut y);
        assert_eq!(y, [3.0, -3.0, 7.0]);
        assert!(all_finite(&y));
        assert!(!all_finite(&[f64::NAN]));
    }
}
