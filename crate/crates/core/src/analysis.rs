//! Error norms, observed orders, the closed-form global and local error of
//! the Crank-Nicolson splitting for solution-independent sources, and the
//! scalar smoothing estimate.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flows::SourceTerm;
use crate::grid::{DiscreteDiffusion, ScalarField};
use crate::krylov::{expmv, KrylovOptions};
use crate::scalar::Real;
use crate::stability::StabilityFunction;

/// Discrete `L2` error between two full-node arrays.
///
/// In 1D, `E^2 = h sum_{l=1}^{N-1} (d_l^2 + d_{l+1}^2) / 2`; in 2D the sum
/// runs over `l, m = 1..N-1` of the average of `d^2` over the four corners
/// `(l, m)`, `(l+1, m)`, `(l, m+1)`, `(l+1, m+1)`, times `h^2`. The first
/// cell of each axis is left out of the sum.
pub fn trapezoid_l2_error<T: Real>(dimension: usize, intervals: usize, numeric: &[T], reference: &[T]) -> Result<T> {
    let per_axis = intervals + 1;
    let expected = per_axis.pow(dimension as u32);
    for len in [numeric.len(), reference.len()] {
        if len != expected {
            return Err(Error::DofMismatch { expected, got: len });
        }
    }
    let d2: Vec<T> = numeric.iter().zip(reference).map(|(&a, &b)| (a - b) * (a - b)).collect();
    let h = T::one() / T::from_usize_lossy(intervals);
    let sum = match dimension {
        1 => {
            let s = (1..intervals).fold(T::zero(), |acc, l| acc + d2[l] + d2[l + 1]);
            h * s / T::lit(2.0)
        }
        2 => {
            let at = |l: usize, m: usize| d2[m * per_axis + l];
            let mut s = T::zero();
            for m in 1..intervals {
                for l in 1..intervals {
                    s = s + at(l, m) + at(l + 1, m) + at(l, m + 1) + at(l + 1, m + 1);
                }
            }
            h * h * s / T::lit(4.0)
        }
        d => return Err(Error::InvalidGrid(format!("dimension {d}"))),
    };
    Ok(sum.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// `E_n` at the final time.
    L2Final,
    /// `max E_k` over `t_k >= t_min`.
    SupL2 { t_min: f64 },
    /// `max t_k E_k`.
    SupTimeWeighted,
}

impl NormKind {
    pub fn label(&self) -> String {
        match self {
            NormKind::L2Final => "L2".into(),
            NormKind::SupL2 { t_min } => format!("Einf_{t_min}"),
            NormKind::SupTimeWeighted => "Ehat_inf".into(),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for NormKind {
    type Err = Error;

    /// `L2`, `Ehat_inf`, or `Einf_<t_min>` such as `Einf_0.02`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L2" => Ok(NormKind::L2Final),
            "Ehat_inf" => Ok(NormKind::SupTimeWeighted),
            _ => s
                .strip_prefix("Einf_")
                .and_then(|t| t.parse::<f64>().ok())
                .filter(|t| *t >= 0.0)
                .map(|t_min| NormKind::SupL2 { t_min })
                .ok_or_else(|| Error::Unknown { kind: "norm", name: s.to_owned() }),
        }
    }
}

/// Reduces the per-step errors `E_0, ..., E_n` (at `t_k = k tau`) to a norm.
pub fn sup_norm<T: Real>(errors: &[T], tau: T, kind: NormKind) -> Result<T> {
    let Some(&last) = errors.last() else {
        return Err(Error::InvalidArgument("no per-step errors".into()));
    };
    match kind {
        NormKind::L2Final => Ok(last),
        NormKind::SupL2 { t_min } => {
            let t_final = T::from_usize_lossy(errors.len() - 1) * tau;
            // t_k >= t_min, tolerant to the rounding of t_min / tau
            let k_min = (T::lit(t_min) / tau - T::lit(1e-9)).ceil().max(T::zero());
            let k_min = k_min.to_usize().unwrap_or(usize::MAX);
            if k_min >= errors.len() {
                return Err(Error::EmptyRange { t_min, t_final: t_final.to_f64_lossy() });
            }
            Ok(errors[k_min..].iter().fold(T::zero(), |m, &e| m.max(e)))
        }
        NormKind::SupTimeWeighted => {
            Ok(errors.iter().enumerate().fold(T::zero(), |m, (k, &e)| m.max(T::from_usize_lossy(k) * tau * e)))
        }
    }
}

/// Least-squares slope of `log2(error)` against `log2(tau)` over rows with a
/// positive, finite error.
pub fn observed_order(rows: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|(t, e)| *t > 0.0 && *e > 0.0 && e.is_finite()).map(|(t, e)| (t.log2(), e.log2())).collect();
    if pts.len() < 2 {
        return Err(Error::NotEnoughRows(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NotEnoughRows(1));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub experiment: String,
    pub method: String,
    pub norm: String,
    /// `(tau, error)` with `tau` decreasing.
    pub rows: Vec<(f64, f64)>,
}

impl ConvergenceTable {
    pub fn new(experiment: impl Into<String>, method: impl Into<String>, norm: impl Into<String>) -> Self {
        Self { experiment: experiment.into(), method: method.into(), norm: norm.into(), rows: Vec::new() }
    }

    pub fn push(&mut self, tau: f64, error: f64) {
        self.rows.push((tau, error));
        self.rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    }

    pub fn fitted_order(&self) -> Result<f64> {
        observed_order(&self.rows)
    }

    /// Rows left out of the fit because their error is zero or not finite.
    pub fn excluded_rows(&self) -> Vec<(f64, f64)> {
        self.rows.iter().copied().filter(|(_, e)| !(*e > 0.0 && e.is_finite())).collect()
    }

    pub fn error_at(&self, tau: f64) -> Option<f64> {
        self.rows.iter().find(|(t, _)| (*t - tau).abs() <= 1e-12 * tau).map(|r| r.1)
    }

    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    pub fn min_error(&self) -> f64 {
        self.rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min)
    }
}

pub const CSV_HEADER: [&str; 5] = ["experiment", "method", "norm", "tau", "error"];

/// Writes `experiment,method,norm,tau,error` rows with 17 significant digits.
pub fn write_csv<W: Write>(tables: &[ConvergenceTable], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for t in tables {
        for &(tau, err) in &t.rows {
            w.write_record([
                t.experiment.as_str(),
                t.method.as_str(),
                t.norm.as_str(),
                &format!("{tau:.16e}"),
                &format!("{err:.16e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `y = A^{-1} (A u0 + g + f)`, the quantity both error formulas act on.
fn defect<T: Real>(op: &DiscreteDiffusion<T>, u0: &[T], f: &SourceTerm<T>) -> Result<Vec<T>> {
    let field = f.as_field(op.dofs())?;
    let c: Vec<T> = op.apply_d(u0)?.iter().zip(&field).map(|(&a, &b)| a + b).collect();
    if c.iter().all(|v| *v == T::zero()) {
        return Ok(c);
    }
    let solver = crate::linalg::DirectSolver::factor(op.matrix())?;
    Ok(solver.solve(&c))
}

/// Homogeneous Crank-Nicolson map `x -> r(tau A) x`.
struct CnPower<T> {
    solver: crate::grid::ShiftedSolver<T>,
}

impl<T: Real> CnPower<T> {
    fn new(op: &DiscreteDiffusion<T>, tau: T) -> Result<Self> {
        Ok(Self { solver: op.shifted_solver(tau / T::lit(2.0))? })
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        let v = self.solver.solve(x);
        v.iter().zip(x).map(|(&a, &b)| a + a - b).collect()
    }
}

/// `e_n = (r(tau A)^n - exp(n tau A)) A^{-1} (A u0 + g + f)`.
pub fn global_error_formula<T: Real>(
    op: &DiscreteDiffusion<T>,
    u0: &[T],
    f: &SourceTerm<T>,
    tau: T,
    n: usize,
    opts: &KrylovOptions<T>,
) -> Result<ScalarField<T>> {
    let y = defect(op, u0, f)?;
    if n == 0 || y.iter().all(|v| *v == T::zero()) {
        return Ok(vec![T::zero(); op.dofs()]);
    }
    let cn = CnPower::new(op, tau)?;
    let mut power = y.clone();
    for _ in 0..n {
        power = cn.apply(&power);
    }
    let exact = expmv(op.matrix(), op.weights(), T::from_usize_lossy(n) * tau, &y, opts)?;
    Ok(power.iter().zip(&exact).map(|(&a, &b)| a - b).collect())
}

/// `delta_{n+1} = (r(tau A) - exp(tau A)) A^{-1} exp(t_n A) (A u0 + g + f)`.
pub fn local_error_formula<T: Real>(
    op: &DiscreteDiffusion<T>,
    u0: &[T],
    f: &SourceTerm<T>,
    tau: T,
    n: usize,
    opts: &KrylovOptions<T>,
) -> Result<ScalarField<T>> {
    let y = defect(op, u0, f)?;
    if y.iter().all(|v| *v == T::zero()) {
        return Ok(y);
    }
    let z = expmv(op.matrix(), op.weights(), T::from_usize_lossy(n) * tau, &y, opts)?;
    let cn = CnPower::new(op, tau)?.apply(&z);
    let ex = expmv(op.matrix(), op.weights(), tau, &z, opts)?;
    Ok(cn.iter().zip(&ex).map(|(&a, &b)| a - b).collect())
}

/// Global errors `e_0..e_n` and local errors `delta_1..delta_n` of the two
/// formulas above, built incrementally: the powers by repeated Crank-Nicolson
/// steps and `exp(t_k A) y` by repeated exponentials of `tau A`.
#[derive(Debug, Clone)]
pub struct ErrorRepresentation<T> {
    pub global: Vec<ScalarField<T>>,
    /// `local[k]` is `delta_{k+1}`.
    pub local: Vec<ScalarField<T>>,
}

pub fn error_representation<T: Real>(
    op: &DiscreteDiffusion<T>,
    u0: &[T],
    f: &SourceTerm<T>,
    tau: T,
    n: usize,
    opts: &KrylovOptions<T>,
) -> Result<ErrorRepresentation<T>> {
    let y = defect(op, u0, f)?;
    let cn = CnPower::new(op, tau)?;
    let zero = vec![T::zero(); op.dofs()];
    let mut global = vec![zero.clone()];
    let mut local = Vec::with_capacity(n);
    let mut power = y.clone();
    let mut exact = y;
    for _ in 0..n {
        let stepped = cn.apply(&exact);
        let next = expmv(op.matrix(), op.weights(), tau, &exact, opts)?;
        local.push(stepped.iter().zip(&next).map(|(&a, &b)| a - b).collect());
        power = cn.apply(&power);
        exact = next;
        global.push(power.iter().zip(&exact).map(|(&a, &b)| a - b).collect());
    }
    Ok(ErrorRepresentation { global, local })
}

/// `r(tau A) x` for the homogeneous Crank-Nicolson step.
pub fn cn_homogeneous_step<T: Real>(op: &DiscreteDiffusion<T>, tau: T, x: &[T]) -> Result<ScalarField<T>> {
    op.check_dofs(x.len())?;
    Ok(CnPower::new(op, tau)?.apply(x))
}

/// Frozen bound on `sup_x n |r(x)^n - e^{nx}| / |x|` over `x < 0`, from a
/// brute-force scan (supremum about 0.09197, approached as `n` grows).
pub const SMOOTHING_CONSTANT: f64 = 0.0920;

#[derive(Debug, Clone, Serialize)]
pub struct SmoothingRecord {
    pub n: usize,
    pub tau: f64,
    /// `sup_lambda t_n |r(tau lambda)^n - e^{n tau lambda}| / (tau^2 |lambda|)`
    pub sup: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothingReport {
    pub records: Vec<SmoothingRecord>,
    /// Largest `S(2n) / S(n)` over doubling pairs with `n >= 8`.
    pub max_doubling_growth: f64,
    pub growth_limit: f64,
    pub pass: bool,
}

/// `S(n, tau)` over a set of negative `lambda`.
pub fn smoothing_sup(lambdas: &[f64], tau: f64, n: usize) -> f64 {
    let r = StabilityFunction::<f64>::crank_nicolson();
    let tn = n as f64 * tau;
    lambdas
        .iter()
        .filter(|l| **l < 0.0)
        .map(|&l| {
            let x = tau * l;
            let rx = r.eval_real(x).expect("no pole on the negative axis");
            tn * (rx.powi(n as i32) - (n as f64 * x).exp()).abs() / (tau * tau * l.abs())
        })
        .fold(0.0, f64::max)
}

/// Checks `S(n, tau) <= SMOOTHING_CONSTANT` for `n >= 3` and that
/// `S(2n) <= (1 + growth) S(n)` whenever both `n >= 8` and `2n` are in `ns`.
pub fn smoothing_estimate_check(lambdas: &[f64], taus: &[f64], ns: &[usize], growth: f64) -> Result<SmoothingReport> {
    if ns.iter().any(|&n| n < 3) {
        return Err(Error::InvalidArgument("the smoothing estimate needs n >= 3".into()));
    }
    let mut records = Vec::new();
    let mut max_growth: f64 = 0.0;
    for &tau in taus {
        let sups: Vec<(usize, f64)> = ns.iter().map(|&n| (n, smoothing_sup(lambdas, tau, n))).collect();
        for &(n, sup) in &sups {
            records.push(SmoothingRecord { n, tau, sup, bound: SMOOTHING_CONSTANT, pass: sup <= SMOOTHING_CONSTANT });
            if n >= 8 {
                if let Some(&(_, next)) = sups.iter().find(|(m, _)| *m == 2 * n) {
                    if sup > 0.0 {
                        max_growth = max_growth.max(next / sup - 1.0);
                    }
                }
            }
        }
    }
    let pass = records.iter().all(|r| r.pass) && max_growth <= growth;
    Ok(SmoothingReport { records, max_doubling_growth: max_growth, growth_limit: growth, pass })
}

/// `-10^s` for `count` values of `s` evenly spaced in `[lo, hi]`.
pub fn negative_log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let s = if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 };
            -(10f64.powf(s))
        })
        .collect()
}
