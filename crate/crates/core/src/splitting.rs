//! Strang compositions of the source flow and a diffusion propagator, and
//! fixed-step integration.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flows::{source_flow_exact, CnForm, DiffusionPropagator, PreparedPropagator, SourceTerm};
use crate::grid::{DiscreteDiffusion, ScalarField};
use crate::scalar::Real;
use crate::stability::StabilityFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// `phi^f_{tau/2} o Phi^D_tau o phi^f_{tau/2}`
    Fdf,
    /// `Phi^D_{tau/2} o phi^f_tau o Phi^D_{tau/2}`
    Dfd,
}

/// Diffusion scheme families that give the method names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Cn,
    Exp,
    Gauss,
    Radau,
    Lobatto,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Cn, Scheme::Exp, Scheme::Gauss, Scheme::Radau, Scheme::Lobatto];

    fn stem(self) -> &'static str {
        match self {
            Scheme::Cn => "StrangCN",
            Scheme::Exp => "StrangEXP",
            Scheme::Gauss => "StrangGauss",
            Scheme::Radau => "StrangRadau",
            Scheme::Lobatto => "StrangLobatto",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingMethod<T> {
    name: String,
    composition: Composition,
    propagator: DiffusionPropagator<T>,
}

impl<T: Real> SplittingMethod<T> {
    pub fn new(name: impl Into<String>, composition: Composition, propagator: DiffusionPropagator<T>) -> Self {
        Self { name: name.into(), composition, propagator }
    }

    /// The named preset: `Fdf` for the plain names, `Dfd` for the `2` suffix.
    pub fn preset(scheme: Scheme, composition: Composition) -> Self {
        let propagator = match scheme {
            Scheme::Cn => DiffusionPropagator::CrankNicolson(CnForm::TwoSolve),
            Scheme::Exp => DiffusionPropagator::exact(),
            Scheme::Gauss => DiffusionPropagator::Rational(StabilityFunction::gauss2()),
            Scheme::Radau => DiffusionPropagator::Rational(StabilityFunction::radau1a2()),
            Scheme::Lobatto => DiffusionPropagator::Rational(StabilityFunction::lobatto3c2()),
        };
        let suffix = if composition == Composition::Dfd { "2" } else { "" };
        Self::new(format!("{}{suffix}", scheme.stem()), composition, propagator)
    }

    pub fn strang_cn() -> Self {
        Self::preset(Scheme::Cn, Composition::Fdf)
    }

    pub fn strang_exp() -> Self {
        Self::preset(Scheme::Exp, Composition::Fdf)
    }

    /// Same method with a different diffusion propagator, keeping the name.
    pub fn with_propagator(mut self, propagator: DiffusionPropagator<T>) -> Self {
        self.propagator = propagator;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn composition(&self) -> Composition {
        self.composition
    }

    pub fn propagator(&self) -> &DiffusionPropagator<T> {
        &self.propagator
    }

    /// All ten preset names.
    pub fn preset_names() -> Vec<String> {
        [Composition::Fdf, Composition::Dfd]
            .into_iter()
            .flat_map(|c| Scheme::ALL.into_iter().map(move |s| Self::preset(s, c).name))
            .collect()
    }
}

impl<T: Real> FromStr for SplittingMethod<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (stem, composition) = match s.strip_suffix('2') {
            Some(stem) => (stem, Composition::Dfd),
            None => (s, Composition::Fdf),
        };
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.stem() == stem)
            .map(|sc| Self::preset(sc, composition))
            .ok_or_else(|| Error::Unknown { kind: "method", name: s.to_owned() })
    }
}

impl<T> fmt::Display for SplittingMethod<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `du/dt = A u + g + f(u)`, `u(0) = initial`, on `[0, final_time]`.
#[derive(Debug, Clone)]
pub struct Problem<T: Real> {
    pub op: DiscreteDiffusion<T>,
    pub source: SourceTerm<T>,
    pub initial: ScalarField<T>,
    pub final_time: T,
}

impl<T: Real> Problem<T> {
    pub fn new(
        op: DiscreteDiffusion<T>,
        source: SourceTerm<T>,
        initial: ScalarField<T>,
        final_time: T,
    ) -> Result<Self> {
        op.check_dofs(initial.len())?;
        if let SourceTerm::SpaceProfile(f) = &source {
            op.check_dofs(f.len())?;
        }
        if !(final_time >= T::zero()) {
            return Err(Error::InvalidArgument(format!("final time must be nonnegative, got {final_time}")));
        }
        Ok(Self { op, source, initial, final_time })
    }

    /// Full right-hand side `A u + g + f(u)`.
    pub fn rhs(&self, u: &[T]) -> Result<Vec<T>> {
        let mut out = self.op.apply_d(u)?;
        for (o, s) in out.iter_mut().zip(self.source.eval(u)?) {
            *o = *o + s;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub tau: T,
    pub n_steps: usize,
    /// `(t_n, u_n)` for `n = 0..=n_steps`.
    pub snapshots: Vec<(T, ScalarField<T>)>,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &[T] {
        &self.snapshots.last().expect("trajectory holds the initial state").1
    }

    /// Snapshot at time `t`, for trajectories whose snapshots sit on the
    /// uniform grid `k tau`.
    pub fn state_at(&self, t: T) -> Option<&[T]> {
        let k = (t / self.tau).round();
        if (k * self.tau - t).abs() > T::lit(1e-9) * self.tau {
            return None;
        }
        let (tk, u) = self.snapshots.get(k.to_usize()?)?;
        ((*tk - t).abs() <= T::lit(1e-9) * self.tau).then_some(u.as_slice())
    }
}

/// Number of steps of size `tau` covering `[0, t_final]`.
pub fn step_count<T: Real>(t_final: T, tau: T) -> Result<usize> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {tau}")));
    }
    (t_final / tau)
        .round()
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument(format!("cannot cover {t_final} with steps of {tau}")))
}

/// A method bound to a problem and a step size, with its propagators
/// prepared once.
#[derive(Debug)]
pub struct Stepper<'a, T: Real> {
    method: &'a SplittingMethod<T>,
    problem: &'a Problem<T>,
    tau: T,
    diffusion: PreparedPropagator<'a, T>,
}

impl<'a, T: Real> Stepper<'a, T> {
    pub fn new(method: &'a SplittingMethod<T>, problem: &'a Problem<T>, tau: T) -> Result<Self> {
        let diffusion_step = match method.composition {
            Composition::Fdf => tau,
            Composition::Dfd => tau / T::lit(2.0),
        };
        let diffusion = method.propagator.prepare(&problem.op, diffusion_step)?;
        Ok(Self { method, problem, tau, diffusion })
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn step(&self, u: &[T]) -> Result<ScalarField<T>> {
        let f = &self.problem.source;
        match self.method.composition {
            Composition::Fdf => {
                let half = self.tau / T::lit(2.0);
                let a = source_flow_exact(f, half, u)?;
                let b = self.diffusion.apply(&a)?;
                source_flow_exact(f, half, &b)
            }
            Composition::Dfd => {
                let a = self.diffusion.apply(u)?;
                let b = source_flow_exact(f, self.tau, &a)?;
                self.diffusion.apply(&b)
            }
        }
    }

    /// Runs `n_steps` from the problem's initial state, calling
    /// `observer(n, t_n, u_n)` for `n = 0..=n_steps`, and returns the final
    /// state.
    pub fn run(&self, n_steps: usize, mut observer: impl FnMut(usize, T, &[T])) -> Result<ScalarField<T>> {
        let mut u = self.problem.initial.clone();
        observer(0, T::zero(), &u);
        for n in 1..=n_steps {
            u = self.step(&u).map_err(|e| Error::StepFailed { step: n, source: Box::new(e) })?;
            observer(n, T::from_usize_lossy(n) * self.tau, &u);
        }
        Ok(u)
    }
}

/// One step of `method` from `u`.
pub fn strang_step<T: Real>(
    method: &SplittingMethod<T>,
    problem: &Problem<T>,
    tau: T,
    u: &[T],
) -> Result<ScalarField<T>> {
    Stepper::new(method, problem, tau)?.step(u)
}

/// `n_steps` steps from the initial state, keeping every snapshot.
pub fn integrate<T: Real>(
    method: &SplittingMethod<T>,
    problem: &Problem<T>,
    tau: T,
    n_steps: usize,
    mut observer: impl FnMut(usize, T, &[T]),
) -> Result<Trajectory<T>> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let stepper = Stepper::new(method, problem, tau)?;
    let mut snapshots = Vec::with_capacity(n_steps + 1);
    stepper.run(n_steps, |n, t, u| {
        observer(n, t, u);
        snapshots.push((t, u.to_vec()));
    })?;
    Ok(Trajectory { tau, n_steps, snapshots })
}
