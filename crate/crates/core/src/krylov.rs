//! `exp(tA) v` by Lanczos iteration in a weighted inner product.
//!
//! The finite-difference operator is not symmetric once Robin or Neumann
//! faces are present, but `W A` is for the diagonal weights of
//! [`DiscreteDiffusion::weights`](crate::grid::DiscreteDiffusion::weights),
//! so Lanczos runs in `<x, y>_W = sum w_i x_i y_i`.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_tridiagonal_eigen, CsrMatrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions<T> {
    /// Bound on the error estimate relative to `|v|_W`.
    pub tolerance: T,
    pub max_subspace_dim: usize,
    /// Budget of time substeps used when the subspace cap is reached.
    pub max_substeps: usize,
}

impl<T: Real> Default for KrylovOptions<T> {
    fn default() -> Self {
        Self { tolerance: T::default_tolerance(), max_subspace_dim: 60, max_substeps: 100_000 }
    }
}

fn wdot<T: Real>(w: &[T], a: &[T], b: &[T]) -> T {
    w.iter().zip(a).zip(b).fold(T::zero(), |acc, ((&wi, &x), &y)| acc + wi * x * y)
}

/// Outcome of one Lanczos projection.
enum Projection<T> {
    Converged(Vec<T>),
    /// Error estimate above tolerance at the subspace cap.
    Unresolved(T),
}

fn project<T: Real>(a: &CsrMatrix<T>, w: &[T], t: T, v: &[T], opts: &KrylovOptions<T>) -> Result<Projection<T>> {
    let n = v.len();
    let beta0 = wdot(w, v, v).sqrt();
    if beta0 == T::zero() {
        return Ok(Projection::Converged(vec![T::zero(); n]));
    }
    let cap = opts.max_subspace_dim.min(n).max(1);
    let mut basis: Vec<Vec<T>> = vec![v.iter().map(|&x| x / beta0).collect()];
    let mut alpha: Vec<T> = Vec::with_capacity(cap);
    let mut beta: Vec<T> = Vec::with_capacity(cap);
    let scale = a.norm_inf() * t.abs();
    let breakdown = T::epsilon() * scale.max(T::one());
    let mut estimate = T::infinity();
    for j in 0..cap {
        let mut next = a.matvec(&basis[j]);
        alpha.push(wdot(w, &next, &basis[j]));
        // full reorthogonalization, twice is enough
        for _ in 0..2 {
            for q in &basis {
                let c = wdot(w, &next, q);
                for (x, &qi) in next.iter_mut().zip(q) {
                    *x = *x - c * qi;
                }
            }
        }
        let b = wdot(w, &next, &next).sqrt();
        let m = j + 1;
        let eig = symmetric_tridiagonal_eigen(&alpha, &beta)?;
        // y = exp(t T_m) e_1
        let y: Vec<T> = (0..m)
            .map(|k| {
                (0..m).fold(T::zero(), |acc, i| acc + eig.vectors[k][i] * (t * eig.values[i]).exp() * eig.vectors[0][i])
            })
            .collect();
        let happy = b * t.abs() <= breakdown;
        // t b |e_m^T phi_1(t T) e_1| with phi_1(x) = (e^x - 1) / x; the plain
        // e^{tT} version vanishes spuriously when t |A| is large
        let phi_last = (0..m).fold(T::zero(), |acc, i| {
            let x = t * eig.values[i];
            let phi = if x == T::zero() { T::one() } else { x.exp_m1() / x };
            acc + eig.vectors[m - 1][i] * phi * eig.vectors[0][i]
        });
        estimate = t.abs() * b * phi_last.abs();
        if happy || estimate <= opts.tolerance || m == n {
            let mut out = vec![T::zero(); n];
            for (q, &yk) in basis.iter().zip(&y) {
                for (o, &qi) in out.iter_mut().zip(q) {
                    *o = *o + beta0 * yk * qi;
                }
            }
            return Ok(Projection::Converged(out));
        }
        if m == cap {
            break;
        }
        beta.push(b);
        basis.push(next.into_iter().map(|x| x / b).collect());
    }
    Ok(Projection::Unresolved(estimate))
}

/// `exp(tA) v` for `A` self-adjoint in the `W` inner product. When the
/// estimate does not reach the tolerance within the subspace cap, the
/// interval is split into substeps.
pub fn expmv<T: Real>(a: &CsrMatrix<T>, weights: &[T], t: T, v: &[T], opts: &KrylovOptions<T>) -> Result<Vec<T>> {
    assert_eq!(weights.len(), v.len());
    if t == T::zero() {
        return Ok(v.to_vec());
    }
    let mut current = v.to_vec();
    let mut done = T::zero();
    let mut step = t;
    let mut substeps = 0;
    let mut last_estimate = T::zero();
    while done < t {
        let delta = step.min(t - done);
        match project(a, weights, delta, &current, opts)? {
            Projection::Converged(next) => {
                current = next;
                done = if delta == t - done { t } else { done + delta };
                substeps += 1;
            }
            Projection::Unresolved(estimate) => {
                last_estimate = estimate;
                step = delta / T::lit(2.0);
                substeps += 1;
            }
        }
        if substeps > opts.max_substeps {
            return Err(Error::KrylovNotConverged { estimate: last_estimate.to_f64_lossy(), substeps });
        }
    }
    Ok(current)
}
