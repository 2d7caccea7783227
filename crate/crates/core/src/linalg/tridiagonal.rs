//! Thomas algorithm for tridiagonal systems, factored once and reused.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Factorization of a tridiagonal matrix.
///
/// `lower[i]` couples row `i + 1` to column `i`, `upper[i]` couples row `i`
/// to column `i + 1`.
#[derive(Debug, Clone)]
pub struct TridiagonalLu<T> {
    lower: Vec<T>,
    // modified super-diagonal c'_i = c_i / d'_i
    upper_mod: Vec<T>,
    // pivots d'_i
    pivots: Vec<T>,
}

impl<T: Real> TridiagonalLu<T> {
    pub fn factor(lower: &[T], diag: &[T], upper: &[T]) -> Result<Self> {
        let n = diag.len();
        assert!(n >= 1);
        assert_eq!(lower.len() + 1, n.max(1));
        assert_eq!(upper.len() + 1, n.max(1));
        let scale = diag.iter().fold(T::zero(), |m, d| m.max(d.abs())).max(T::min_positive_value());
        let tiny = scale * T::epsilon() * T::epsilon();
        let mut pivots = Vec::with_capacity(n);
        let mut upper_mod = Vec::with_capacity(n.saturating_sub(1));
        let mut d = diag[0];
        for i in 0..n {
            if i > 0 {
                d = diag[i] - lower[i - 1] * upper_mod[i - 1];
            }
            if d.abs() <= tiny || !d.is_finite() {
                return Err(Error::SingularSystem { row: i, pivot: d.to_f64_lossy() });
            }
            pivots.push(d);
            if i + 1 < n {
                upper_mod.push(upper[i] / d);
            }
        }
        Ok(Self { lower: lower.to_vec(), upper_mod, pivots })
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        x[0] = x[0] / self.pivots[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i - 1] * x[i - 1]) / self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - self.upper_mod[i] * x[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_poisson_stencil() {
        // -u'' = 2 on (0,1), u(0)=u(1)=0 -> u = x(1-x), exact for the 3-point stencil
        let n = 9;
        let h = 0.1_f64;
        let lu = TridiagonalLu::factor(&vec![-1.0; n - 1], &vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        let x = lu.solve(&vec![2.0 * h * h; n]);
        for (i, xi) in x.iter().enumerate() {
            let t = (i + 1) as f64 * h;
            assert!((xi - t * (1.0 - t)).abs() < 1e-14);
        }
    }

    #[test]
    fn detects_singular_matrix() {
        let err = TridiagonalLu::factor(&[1.0], &[1.0, 1.0], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { row: 1, .. }));
    }

    #[test]
    fn one_by_one() {
        let lu = TridiagonalLu::factor(&[], &[2.0], &[]).unwrap();
        assert_eq!(lu.solve(&[3.0]), vec![1.5]);
    }
}
