//! Rational stability functions `R = P / Q`, evaluated on scalars and on the
//! discrete diffusion operator, together with numeric checks of the scalar
//! identities and inequalities satisfied by the Crank-Nicolson function
//! `r(z) = (1 + z/2) / (1 - z/2)`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::DiscreteDiffusion;
use crate::linalg::{CsrMatrix, DirectSolver};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityFunction<T> {
    name: String,
    numerator: Vec<T>,
    denominator: Vec<T>,
}

impl<T: Real> StabilityFunction<T> {
    /// Coefficients in ascending degree; both constant terms must be 1.
    pub fn new(name: impl Into<String>, numerator: Vec<T>, denominator: Vec<T>) -> Result<Self> {
        let name = name.into();
        if numerator.first() != Some(&T::one()) || denominator.first() != Some(&T::one()) {
            return Err(Error::UnsupportedStabilityFunction(name));
        }
        Ok(Self { name, numerator, denominator })
    }

    fn preset(name: &str, numerator: &[f64], denominator: &[f64]) -> Self {
        Self {
            name: name.to_owned(),
            numerator: numerator.iter().map(|&c| T::lit(c)).collect(),
            denominator: denominator.iter().map(|&c| T::lit(c)).collect(),
        }
    }

    fn third() -> T {
        T::one() / T::lit(3.0)
    }

    pub fn crank_nicolson() -> Self {
        Self::preset("CN", &[1.0, 0.5], &[1.0, -0.5])
    }

    pub fn implicit_euler() -> Self {
        Self::preset("ImplicitEuler", &[1.0], &[1.0, -1.0])
    }

    pub fn gauss2() -> Self {
        let twelfth = T::one() / T::lit(12.0);
        Self {
            name: "Gauss2".into(),
            numerator: vec![T::one(), T::lit(0.5), twelfth],
            denominator: vec![T::one(), T::lit(-0.5), twelfth],
        }
    }

    pub fn radau1a2() -> Self {
        let third = Self::third();
        Self {
            name: "Radau1a2".into(),
            numerator: vec![T::one(), third],
            denominator: vec![T::one(), -(third + third), T::one() / T::lit(6.0)],
        }
    }

    pub fn lobatto3c2() -> Self {
        Self::preset("Lobatto3c2", &[1.0], &[1.0, -1.0, 0.5])
    }

    /// `P = Q = 1`
    pub fn identity() -> Self {
        Self::preset("Identity", &[1.0], &[1.0])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn numerator(&self) -> &[T] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[T] {
        &self.denominator
    }

    pub fn degree(&self) -> usize {
        self.numerator.len().max(self.denominator.len()) - 1
    }

    /// `P(z) / Q(z)` by Horner's rule.
    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        let p = horner(&self.numerator, z);
        let q = horner(&self.denominator, z);
        let floor = T::lit(1e-300).max(T::min_positive_value());
        if q.norm() < floor {
            return Err(Error::Pole { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy() });
        }
        Ok(p / q)
    }

    pub fn eval_real(&self, y: T) -> Result<T> {
        self.eval(Complex::new(y, T::zero())).map(|c| c.re)
    }

    /// Prepares `v -> Q(tau A)^{-1} P(tau A) v` for one step size.
    pub fn prepare(&self, tau: T, op: &DiscreteDiffusion<T>) -> Result<RationalOperator<T>> {
        if self.degree() > 2 {
            return Err(Error::UnsupportedStabilityFunction(self.name.clone()));
        }
        if !(tau > T::zero()) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {tau}")));
        }
        let n = op.dofs();
        let tau_a = op.matrix().scaled(tau);
        let mut q = CsrMatrix::identity(n).scaled(self.denominator[0]);
        let mut power = CsrMatrix::identity(n);
        for &c in &self.denominator[1..] {
            power = power.matmul(&tau_a);
            q = q.lincomb(T::one(), &power, c);
        }
        let solver = if self.denominator.len() == 1 { None } else { Some(DirectSolver::factor(&q)?) };
        Ok(RationalOperator { numerator: self.numerator.clone(), denominator0: self.denominator[0], tau_a, solver })
    }

    /// `Q(tau A)^{-1} P(tau A) v`
    pub fn apply_to_operator(&self, tau: T, op: &DiscreteDiffusion<T>, v: &[T]) -> Result<Vec<T>> {
        op.check_dofs(v.len())?;
        Ok(self.prepare(tau, op)?.apply(v))
    }
}

fn horner<T: Real>(coeffs: &[T], z: Complex<T>) -> Complex<T> {
    coeffs.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
}

/// A rational function of `tau A` with `Q(tau A)` already factored.
#[derive(Debug, Clone)]
pub struct RationalOperator<T> {
    numerator: Vec<T>,
    denominator0: T,
    tau_a: CsrMatrix<T>,
    solver: Option<DirectSolver<T>>,
}

impl<T: Real> RationalOperator<T> {
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        // Horner on the matrix: P v = p0 v + tA (p1 v + tA (p2 v + ...))
        let mut acc: Vec<T> = v.iter().map(|&x| x * *self.numerator.last().expect("nonempty")).collect();
        for &c in self.numerator.iter().rev().skip(1) {
            acc = self.tau_a.matvec(&acc);
            for (a, &x) in acc.iter_mut().zip(v) {
                *a = *a + c * x;
            }
        }
        match &self.solver {
            Some(s) => s.solve(&acc),
            None => acc.into_iter().map(|x| x / self.denominator0).collect(),
        }
    }
}

/// Largest residuals of the identities `r + 1 = 2/(1 - z/2)`,
/// `r - 1 = z/(1 - z/2)` and `r - e^z = (z/2)(r + 1) - (e^z - 1)`, each
/// divided by the largest term appearing in it.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub samples: usize,
    pub max_plus_one: f64,
    pub max_minus_one: f64,
    pub max_difference: f64,
    pub tolerance: f64,
    /// Samples whose residual exceeded the tolerance, as `(re, im)`.
    pub failures: Vec<(f64, f64)>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn relative<T: Real>(lhs: Complex<T>, rhs: Complex<T>, terms: &[Complex<T>]) -> f64 {
    let diff = (lhs - rhs).norm();
    if diff == T::zero() {
        return 0.0;
    }
    let scale = terms.iter().fold(T::zero(), |m, t| m.max(t.norm()));
    (diff / scale).to_f64_lossy()
}

pub fn check_lemma_identities<T: Real>(samples: &[Complex<T>], tolerance: f64) -> IdentityReport {
    let r = StabilityFunction::<T>::crank_nicolson();
    let one = Complex::new(T::one(), T::zero());
    let half = T::lit(0.5);
    let two = one + one;
    let mut report = IdentityReport {
        samples: samples.len(),
        max_plus_one: 0.0,
        max_minus_one: 0.0,
        max_difference: 0.0,
        tolerance,
        failures: Vec::new(),
    };
    for &z in samples {
        let Ok(rz) = r.eval(z) else {
            report.failures.push((z.re.to_f64_lossy(), z.im.to_f64_lossy()));
            continue;
        };
        let denom = one - z * half;
        let a = relative(rz + one, two / denom, &[rz, one, two / denom]);
        let b = relative(rz - one, z / denom, &[rz, one, z / denom]);
        let ez = z.exp();
        let lhs = rz - ez;
        let rhs = z * half * (rz + one) - (ez - one);
        let c = relative(lhs, rhs, &[rz, ez, one, z * half * (rz + one)]);
        report.max_plus_one = report.max_plus_one.max(a);
        report.max_minus_one = report.max_minus_one.max(b);
        report.max_difference = report.max_difference.max(c);
        if a > tolerance || b > tolerance || c > tolerance {
            report.failures.push((z.re.to_f64_lossy(), z.im.to_f64_lossy()));
        }
    }
    report
}

/// One evaluated inequality `lhs <= rhs` at a sample point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRecord {
    pub check: &'static str,
    pub z_re: f64,
    pub z_im: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Deterministic polar sample grid of the closed left half-plane:
/// `radii` moduli spaced geometrically in `[1e-4, 1e4]` times `angles`
/// arguments in `[pi/2, 3pi/2]`, plus the origin.
pub fn left_half_plane_grid<T: Real>(radii: usize, angles: usize) -> Vec<Complex<T>> {
    let mut out = vec![Complex::new(T::zero(), T::zero())];
    let log_lo = T::lit(-4.0);
    let log_hi = T::lit(4.0);
    let ten = T::lit(10.0);
    for i in 0..radii {
        let s = if radii == 1 { T::zero() } else { T::from_usize_lossy(i) / T::from_usize_lossy(radii - 1) };
        let rho = ten.powf(log_lo + (log_hi - log_lo) * s);
        for j in 0..angles {
            let s = if angles == 1 { T::lit(0.5) } else { T::from_usize_lossy(j) / T::from_usize_lossy(angles - 1) };
            let theta = T::FRAC_PI_2() + T::PI() * s;
            out.push(Complex::from_polar(rho, theta));
        }
    }
    out
}

/// Evaluates the scalar inequalities at every sample:
///
/// * `lemma2`: `|r(z) - e^z| <= 5/12 |z|^3` for `|z| <= 1`;
/// * `lemma3`: `|r(z)| <= max(e^{4/5 Re z}, e^{4/5 Re(1/z)})` for `Re z < 0`;
/// * `euler_half`: `|r0(z/2) - e^{z/2}| <= 3/8 |z|^2` for `|z| <= 1`;
/// * `euler_squared`: `|r0(z/2)^2 - e^z| <= 6/8 |z|^2` for `|z| <= 1`;
/// * `real_axis`: `r(-x) <= e^{-x}` at `x = |z|`.
///
/// A check passes when `lhs <= rhs + slack`.
pub fn check_appendix_bounds<T: Real>(samples: &[Complex<T>], slack: T) -> Vec<BoundRecord> {
    let r = StabilityFunction::<T>::crank_nicolson();
    let r0 = StabilityFunction::<T>::implicit_euler();
    let half = T::lit(0.5);
    let four_fifths = T::lit(0.8);
    let mut out = Vec::new();
    let mut push = |check: &'static str, z: Complex<T>, lhs: T, rhs: T| {
        out.push(BoundRecord {
            check,
            z_re: z.re.to_f64_lossy(),
            z_im: z.im.to_f64_lossy(),
            lhs: lhs.to_f64_lossy(),
            rhs: rhs.to_f64_lossy(),
            pass: lhs <= rhs + slack,
        });
    };
    for &z in samples {
        let modulus = z.norm();
        let rz = r.eval(z).expect("no pole in the left half-plane");
        if modulus <= T::one() {
            push("lemma2", z, (rz - z.exp()).norm(), T::lit(5.0) / T::lit(12.0) * modulus.powi(3));
            let e = r0.eval(z * half).expect("no pole");
            let eh = (z * half).exp();
            push("euler_half", z, (e - eh).norm(), T::lit(3.0) / T::lit(8.0) * modulus.powi(2));
            push("euler_squared", z, (e * e - z.exp()).norm(), T::lit(6.0) / T::lit(8.0) * modulus.powi(2));
        }
        if z.re < T::zero() {
            let inv = z.inv();
            let bound = (four_fifths * z.re).exp().max((four_fifths * inv.re).exp());
            push("lemma3", z, rz.norm(), bound);
        }
        let x = Complex::new(-modulus, T::zero());
        push("real_axis", x, r.eval_real(-modulus).expect("no pole"), (-modulus).exp());
    }
    out
}

/// The inequality of `lemma3` with the second exponent written as
/// `4 / (5 Re z)`; it fails close to the imaginary axis, which is why
/// [`check_appendix_bounds`] uses `Re(1/z)`.
pub fn lemma3_reciprocal_real_part_bound<T: Real>(z: Complex<T>) -> (T, T) {
    let r = StabilityFunction::<T>::crank_nicolson();
    let lhs = r.eval(z).expect("no pole").norm();
    let rhs = (T::lit(0.8) * z.re).exp().max((T::lit(0.8) / z.re).exp());
    (lhs, rhs)
}

/// `y` values at which the integral bounds are evaluated.
pub const INTEGRAL_SAMPLE_Y: [f64; 7] = [1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6];

/// Bounds for `int_1^inf e^{-y/x} y^k / x^{k+1} dx`, `k = 1, 2, 3`, frozen
/// from a brute-force scan over [`INTEGRAL_SAMPLE_Y`].
pub const TAIL_INTEGRAL_BOUND: [f64; 3] = [1.0, 1.0, 2.0];

/// Bounds for `int_0^1 e^{-yx} y^{k+1} x^k dx`, `k = 1, 2, 3`, frozen the
/// same way.
pub const HEAD_INTEGRAL_BOUND: [f64; 3] = [1.0, 2.0, 6.0];

#[derive(Debug, Clone, Serialize)]
pub struct IntegralRecord {
    pub check: &'static str,
    pub k: u32,
    pub y: f64,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `int_1^inf e^{-y/x} y^k / x^{k+1} dx`, computed after substituting
/// `x = 1/t` as `int_0^1 e^{-yt} y^k t^{k-1} dt`.
pub fn tail_integral(y: f64, k: u32) -> f64 {
    let ki = k as i32;
    integrate_unit(|t| (-y * t).exp() * y.powi(ki) * t.powi(ki - 1))
}

/// `int_0^1 e^{-yx} y^{k+1} x^k dx`
pub fn head_integral(y: f64, k: u32) -> f64 {
    let ki = k as i32;
    integrate_unit(|x| (-y * x).exp() * y.powi(ki + 1) * x.powi(ki))
}

pub fn check_integral_bounds(relative_slack: f64) -> Vec<IntegralRecord> {
    let mut out = Vec::new();
    for k in 1..=3u32 {
        for &y in &INTEGRAL_SAMPLE_Y {
            for (check, value, bound) in [
                ("tail_integral", tail_integral(y, k), TAIL_INTEGRAL_BOUND[k as usize - 1]),
                ("head_integral", head_integral(y, k), HEAD_INTEGRAL_BOUND[k as usize - 1]),
            ] {
                out.push(IntegralRecord { check, k, y, value, bound, pass: value <= bound * (1.0 + relative_slack) });
            }
        }
    }
    out
}

// Adaptive Simpson over [0, 1] split at 10^-j so integrands concentrated near
// the origin are resolved.
fn integrate_unit(f: impl Fn(f64) -> f64) -> f64 {
    let mut breaks: Vec<f64> = (1..=10).rev().map(|j| 10f64.powi(-j)).collect();
    breaks.insert(0, 0.0);
    breaks.push(1.0);
    breaks.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], 1e-15, 50)).sum()
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol.max(1e-15 * (left + right).abs()) {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}
