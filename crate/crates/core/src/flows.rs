//! Exact flows of the source terms and the diffusion propagators used inside
//! the splittings.

use crate::error::{Error, Result};
use crate::grid::{DiscreteDiffusion, ScalarField, ShiftedSolver};
use crate::krylov::{expmv, KrylovOptions};
use crate::scalar::Real;
use crate::stability::{RationalOperator, StabilityFunction};

/// Source terms with a closed-form flow of `du/dt = f(u)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceTerm<T> {
    Constant(T),
    /// `f(x)` sampled on the active dofs.
    SpaceProfile(Vec<T>),
    /// `f(u) = a u`
    LinearInU(T),
    /// `f(u) = u^2`
    QuadraticInU,
}

/// Margin below which `1 - t u` is treated as the pole of the quadratic flow.
pub const QUADRATIC_BLOW_UP_MARGIN: f64 = 1e-12;

impl<T: Real> SourceTerm<T> {
    pub fn zero() -> Self {
        SourceTerm::Constant(T::zero())
    }

    pub fn depends_on_solution(&self) -> bool {
        matches!(self, SourceTerm::LinearInU(_) | SourceTerm::QuadraticInU)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SourceTerm::Constant(c) => *c == T::zero(),
            SourceTerm::SpaceProfile(f) => f.iter().all(|v| *v == T::zero()),
            SourceTerm::LinearInU(a) => *a == T::zero(),
            SourceTerm::QuadraticInU => false,
        }
    }

    /// `f(u)` pointwise.
    pub fn eval(&self, u: &[T]) -> Result<Vec<T>> {
        match self {
            SourceTerm::Constant(c) => Ok(vec![*c; u.len()]),
            SourceTerm::SpaceProfile(f) => {
                check_len(f.len(), u.len())?;
                Ok(f.clone())
            }
            SourceTerm::LinearInU(a) => Ok(u.iter().map(|&x| *a * x).collect()),
            SourceTerm::QuadraticInU => Ok(u.iter().map(|&x| x * x).collect()),
        }
    }

    /// Derivative `f'(u)` pointwise.
    pub fn jacobian_diagonal(&self, u: &[T]) -> Vec<T> {
        match self {
            SourceTerm::Constant(_) | SourceTerm::SpaceProfile(_) => vec![T::zero(); u.len()],
            SourceTerm::LinearInU(a) => vec![*a; u.len()],
            SourceTerm::QuadraticInU => u.iter().map(|&x| x + x).collect(),
        }
    }

    /// The field `f` of a solution-independent source on `dofs` unknowns.
    pub fn as_field(&self, dofs: usize) -> Result<Vec<T>> {
        match self {
            SourceTerm::Constant(c) => Ok(vec![*c; dofs]),
            SourceTerm::SpaceProfile(f) => {
                check_len(dofs, f.len())?;
                Ok(f.clone())
            }
            _ => Err(Error::SourceDependsOnSolution),
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DofMismatch { expected, got })
    }
}

/// Exact flow `phi^f_t(u)` of `du/dt = f(u)`.
pub fn source_flow_exact<T: Real>(f: &SourceTerm<T>, t: T, u: &[T]) -> Result<ScalarField<T>> {
    match f {
        SourceTerm::Constant(c) => Ok(u.iter().map(|&x| x + t * *c).collect()),
        SourceTerm::SpaceProfile(p) => {
            check_len(p.len(), u.len())?;
            Ok(u.iter().zip(p).map(|(&x, &fx)| x + t * fx).collect())
        }
        SourceTerm::LinearInU(a) => {
            let g = (*a * t).exp();
            Ok(u.iter().map(|&x| g * x).collect())
        }
        SourceTerm::QuadraticInU => {
            let floor = T::lit(QUADRATIC_BLOW_UP_MARGIN);
            u.iter()
                .enumerate()
                .map(|(dof, &x)| {
                    let margin = T::one() - t * x;
                    if margin <= floor {
                        Err(Error::QuadraticBlowUp { dof, margin: margin.to_f64_lossy() })
                    } else {
                        Ok(x / margin)
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnForm {
    /// One solve for `v`, then `u1 = 2v - u`.
    TwoSolve,
    /// Stage increments `k1`, `k2`; exact at the fixed point.
    StageForm,
}

/// How the diffusion sub-problem `du/dt = A u + g` is advanced.
#[derive(Debug, Clone, PartialEq)]
pub enum DiffusionPropagator<T> {
    CrankNicolson(CnForm),
    Rational(StabilityFunction<T>),
    ExactKrylov(KrylovOptions<T>),
}

impl<T: Real> DiffusionPropagator<T> {
    pub fn exact() -> Self {
        DiffusionPropagator::ExactKrylov(KrylovOptions::default())
    }

    /// Prepares the propagator for one step size; factorizations are reused
    /// across calls to [`PreparedPropagator::apply`].
    pub fn prepare<'a>(&self, op: &'a DiscreteDiffusion<T>, tau: T) -> Result<PreparedPropagator<'a, T>> {
        if !(tau > T::zero()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {tau}")));
        }
        let kind = match self {
            DiffusionPropagator::CrankNicolson(form) => {
                Prepared::Cn { form: *form, solver: op.shifted_solver(tau / T::lit(2.0))? }
            }
            DiffusionPropagator::Rational(r) => {
                Prepared::Rational { steady: op.steady_state()?, rational: r.prepare(tau, op)? }
            }
            DiffusionPropagator::ExactKrylov(opts) => Prepared::Exact { steady: op.steady_state()?, opts: *opts },
        };
        Ok(PreparedPropagator { op, tau, kind })
    }
}

#[derive(Debug, Clone)]
enum Prepared<T> {
    Cn { form: CnForm, solver: ShiftedSolver<T> },
    Rational { steady: Vec<T>, rational: RationalOperator<T> },
    Exact { steady: Vec<T>, opts: KrylovOptions<T> },
}

#[derive(Debug, Clone)]
pub struct PreparedPropagator<'a, T: Real> {
    op: &'a DiscreteDiffusion<T>,
    tau: T,
    kind: Prepared<T>,
}

impl<T: Real> PreparedPropagator<'_, T> {
    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn apply(&self, u: &[T]) -> Result<ScalarField<T>> {
        let op = self.op;
        op.check_dofs(u.len())?;
        let half = self.tau / T::lit(2.0);
        match &self.kind {
            Prepared::Cn { form: CnForm::TwoSolve, solver } => {
                let rhs: Vec<T> = u.iter().zip(op.load()).map(|(&x, &g)| x + half * g).collect();
                let v = solver.solve(&rhs);
                Ok(v.iter().zip(u).map(|(&vi, &x)| vi + vi - x).collect())
            }
            Prepared::Cn { form: CnForm::StageForm, solver } => {
                let k1 = op.apply_d(u)?;
                let mid: Vec<T> = u.iter().zip(&k1).map(|(&x, &k)| x + half * k).collect();
                let k2 = solver.solve(&op.apply_d(&mid)?);
                Ok(u.iter().zip(k1.iter().zip(&k2)).map(|(&x, (&a, &b))| x + half * (a + b)).collect())
            }
            Prepared::Rational { steady, rational } => {
                let d: Vec<T> = u.iter().zip(steady).map(|(&x, &w)| x - w).collect();
                Ok(rational.apply(&d).iter().zip(steady).map(|(&y, &w)| y + w).collect())
            }
            Prepared::Exact { steady, opts } => {
                let d: Vec<T> = u.iter().zip(steady).map(|(&x, &w)| x - w).collect();
                let y = expmv(op.matrix(), op.weights(), self.tau, &d, opts)?;
                Ok(y.iter().zip(steady).map(|(&y, &w)| y + w).collect())
            }
        }
    }
}

/// One Crank-Nicolson step through `v = (I - tau/2 A)^{-1} (u + tau/2 g)`,
/// `u1 = 2v - u`.
pub fn diffusion_step_cn<T: Real>(op: &DiscreteDiffusion<T>, tau: T, u: &[T]) -> Result<ScalarField<T>> {
    DiffusionPropagator::CrankNicolson(CnForm::TwoSolve).prepare(op, tau)?.apply(u)
}

/// One Crank-Nicolson step in stage form:
/// `k1 = A u + g`, `(I - tau/2 A) k2 = A (u + tau/2 k1) + g`,
/// `u1 = u + tau/2 (k1 + k2)`.
pub fn diffusion_step_cn_stage_form<T: Real>(op: &DiscreteDiffusion<T>, tau: T, u: &[T]) -> Result<ScalarField<T>> {
    DiffusionPropagator::CrankNicolson(CnForm::StageForm).prepare(op, tau)?.apply(u)
}

/// `w + R(tau A)(u - w)` with `w` the steady state.
pub fn diffusion_step_rational<T: Real>(
    op: &DiscreteDiffusion<T>,
    r: &StabilityFunction<T>,
    tau: T,
    u: &[T],
) -> Result<ScalarField<T>> {
    DiffusionPropagator::Rational(r.clone()).prepare(op, tau)?.apply(u)
}

/// `w + exp(tA)(u - w)`
pub fn diffusion_flow_exact<T: Real>(
    op: &DiscreteDiffusion<T>,
    t: T,
    u: &[T],
    opts: &KrylovOptions<T>,
) -> Result<ScalarField<T>> {
    op.check_dofs(u.len())?;
    if t == T::zero() {
        return Ok(u.to_vec());
    }
    DiffusionPropagator::ExactKrylov(*opts).prepare(op, t)?.apply(u)
}
