//! Dense nalgebra oracles shared by the integration tests.
#![allow(dead_code)]

use cnsplit::grid::{BoundaryFaceCondition, BoundarySpec, DiscreteDiffusion, UniformGrid};
use nalgebra::{DMatrix, DVector};

pub type Op = DiscreteDiffusion<f64>;
pub type Bc = BoundaryFaceCondition<f64>;

pub fn dense(op: &Op) -> DMatrix<f64> {
    let rows = op.matrix().to_dense();
    let n = op.dofs();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Eigendecomposition of `W^{1/2} A W^{-1/2}`, returned with the scaling
/// `s = sqrt(w)` so callers can map back.
pub struct Spectral {
    pub s: Vec<f64>,
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectral {
    pub fn new(op: &Op) -> Self {
        let a = dense(op);
        let s: Vec<f64> = op.weights().iter().map(|w| w.sqrt()).collect();
        let n = op.dofs();
        let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (s[i] * a[(i, j)] / s[j] + s[j] * a[(j, i)] / s[i]));
        let eig = sym.symmetric_eigen();
        Self { s, values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    /// `g(A) v` for a scalar function applied to the eigenvalues.
    pub fn apply(&self, g: impl Fn(f64) -> f64, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let sv = DVector::from_fn(n, |i, _| self.s[i] * v[i]);
        let c = self.vectors.transpose() * sv;
        let scaled = DVector::from_fn(n, |i, _| g(self.values[i]) * c[i]);
        let back = &self.vectors * scaled;
        (0..n).map(|i| back[i] / self.s[i]).collect()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.values.max()
    }
}

pub fn one_d(n: usize, left: Bc, right: Bc) -> Op {
    DiscreteDiffusion::build_1d(UniformGrid::one_d(n).unwrap(), BoundarySpec::one_d(left, right)).unwrap()
}

pub fn two_d(n: usize, faces: [Bc; 4]) -> Op {
    let [l, r, b, t] = faces;
    DiscreteDiffusion::build_2d(UniformGrid::two_d(n).unwrap(), BoundarySpec::two_d(l, r, b, t)).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Face condition `kind` in 0..3: Dirichlet, Neumann, Robin with positive
/// `alpha`, so the operator stays negative definite.
pub fn face(kind: u8, value: f64, alpha: f64) -> Bc {
    match kind % 3 {
        0 => Bc::dirichlet(value),
        1 => Bc::neumann(value),
        _ => Bc::robin(alpha, 1.0, value),
    }
}
