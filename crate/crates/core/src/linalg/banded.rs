//! Banded LU factorization without pivoting.
//!
//! Every matrix factored here is a diagonal similarity transform of a
//! symmetric positive definite matrix (or diagonally dominant), so elimination
//! without row exchanges is stable and keeps the band.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    lower: usize,
    upper: usize,
    // row-major band storage: entry (i, j) lives at i * width + (j + lower - i)
    band: Vec<T>,
}

impl<T: Real> BandedLu<T> {
    pub fn factor(matrix: &CsrMatrix<T>) -> Result<Self> {
        assert_eq!(matrix.nrows(), matrix.ncols());
        let n = matrix.nrows();
        let (lower, upper) = matrix.bandwidths();
        let width = lower + upper + 1;
        let mut band = vec![T::zero(); n * width];
        for i in 0..n {
            for (j, v) in matrix.row(i) {
                band[i * width + j + lower - i] = v;
            }
        }
        let scale = matrix.norm_inf().max(T::min_positive_value());
        let tiny = scale * T::epsilon() * T::epsilon();
        for k in 0..n {
            let pivot = band[k * width + lower];
            if pivot.abs() <= tiny || !pivot.is_finite() {
                return Err(Error::SingularSystem { row: k, pivot: pivot.to_f64_lossy() });
            }
            let last_row = (k + lower).min(n - 1);
            let last_col = (k + upper).min(n - 1);
            for i in k + 1..=last_row {
                let ik = i * width + k + lower - i;
                let factor = band[ik] / pivot;
                band[ik] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = band[k * width + j + lower - k];
                    let ij = i * width + j + lower - i;
                    band[ij] = band[ij] - factor * kj;
                }
            }
        }
        Ok(Self { n, lower, upper, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        let width = self.lower + self.upper + 1;
        for i in 0..n {
            let first = i.saturating_sub(self.lower);
            let mut acc = x[i];
            for (j, &xj) in x.iter().enumerate().take(i).skip(first) {
                acc = acc - self.band[i * width + j + self.lower - i] * xj;
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let last = (i + self.upper).min(n - 1);
            let mut acc = x[i];
            for (j, &xj) in x.iter().enumerate().take(last + 1).skip(i + 1) {
                acc = acc - self.band[i * width + j + self.lower - i] * xj;
            }
            x[i] = acc / self.band[i * width + self.lower];
        }
    }
}
