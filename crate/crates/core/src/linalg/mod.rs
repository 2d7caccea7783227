//! Sparse storage and direct solvers sized for desk-scale grids.

mod banded;
mod eigen;
mod sparse;
mod tridiagonal;

pub use banded::BandedLu;
pub use eigen::{symmetric_tridiagonal_eigen, TridiagonalEigen};
pub use sparse::CsrMatrix;
pub use tridiagonal::TridiagonalLu;

use crate::error::Result;
use crate::scalar::Real;

/// A factored square matrix: tridiagonal matrices go through the Thomas
/// algorithm, anything wider through banded LU.
#[derive(Debug, Clone)]
pub enum DirectSolver<T> {
    Tridiagonal(TridiagonalLu<T>),
    Banded(BandedLu<T>),
}

impl<T: Real> DirectSolver<T> {
    pub fn factor(matrix: &CsrMatrix<T>) -> Result<Self> {
        let (lower, upper) = matrix.bandwidths();
        if lower <= 1 && upper <= 1 {
            let n = matrix.nrows();
            let diag = matrix.diagonal();
            let sub: Vec<T> = (1..n).map(|i| matrix.get(i, i - 1)).collect();
            let sup: Vec<T> = (0..n.saturating_sub(1)).map(|i| matrix.get(i, i + 1)).collect();
            Ok(Self::Tridiagonal(TridiagonalLu::factor(&sub, &diag, &sup)?))
        } else {
            Ok(Self::Banded(BandedLu::factor(matrix)?))
        }
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        match self {
            Self::Tridiagonal(lu) => lu.solve(rhs),
            Self::Banded(lu) => lu.solve(rhs),
        }
    }
}
