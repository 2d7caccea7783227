mod common;

use cnsplit::analysis::{
    cn_homogeneous_step, global_error_formula, local_error_formula, observed_order, sup_norm, trapezoid_l2_error,
    ConvergenceTable, NormKind,
};
use cnsplit::experiments::{preset_problem, random_field, Preset};
use cnsplit::krylov::KrylovOptions;
use cnsplit::splitting::{integrate, SplittingMethod};
use cnsplit::{DoubleDouble, Real};
use common::{norm2, Spectral};
use num_traits::{Float, Zero};
use proptest::prelude::*;

#[test]
fn trapezoid_matches_direct_summation() {
    let n = 20;
    let a = random_field(n + 1, 1);
    let b = random_field(n + 1, 2);
    let h = 1.0 / n as f64;
    let mut sum = 0.0;
    for l in 1..n {
        let d0 = a[l] - b[l];
        let d1 = a[l + 1] - b[l + 1];
        sum += (d0 * d0 + d1 * d1) / 2.0;
    }
    let want = (h * sum).sqrt();
    let got = trapezoid_l2_error(1, n, &a, &b).unwrap();
    assert!((got - want).abs() <= 4.0 * f64::EPSILON * want);
}

/// Semi-discrete exact solution `w + exp(tA)(u0 - w)` with `A w + g + f = 0`.
fn exact_solution(p: &cnsplit::Problem, spec: &Spectral, t: f64) -> Vec<f64> {
    let f = p.source.as_field(p.op.dofs()).unwrap();
    let rhs = nalgebra::DVector::from_fn(p.op.dofs(), |i, _| -(p.op.load()[i] + f[i]));
    let w = common::dense(&p.op).lu().solve(&rhs).unwrap();
    let d: Vec<f64> = p.initial.iter().zip(w.iter()).map(|(u, w)| u - w).collect();
    let e = spec.apply(|l| (t * l).exp(), &d);
    e.iter().zip(w.iter()).map(|(e, w)| e + w).collect()
}

#[test]
fn measured_error_equals_global_formula() {
    let p = preset_problem::<f64>(Preset::Fig1a, 100).unwrap();
    let spec = Spectral::new(&p.op);
    let tau = 0.01;
    let n = 10;
    let traj = integrate(&SplittingMethod::strang_cn(), &p, tau, n, |_, _, _| {}).unwrap();
    let exact = exact_solution(&p, &spec, n as f64 * tau);
    let measured: Vec<f64> = traj.final_state().iter().zip(&exact).map(|(a, b)| a - b).collect();
    let formula = global_error_formula(&p.op, &p.initial, &p.source, tau, n, &KrylovOptions::default()).unwrap();
    let dev = norm2(&measured.iter().zip(&formula).map(|(a, b)| a - b).collect::<Vec<_>>());
    assert!(dev <= 1e-9 * norm2(&measured), "{:e}", dev / norm2(&measured));
}

#[test]
fn local_errors_sum_to_global_error() {
    // e_n = sum_k r^{n-k-1} delta_{k+1}; in f64 the local errors cancel to
    // about 1e-8 relative, so the identity is checked in double-double
    type D = DoubleDouble;
    let opts = KrylovOptions { tolerance: D::lit(1e-26), ..KrylovOptions::default() };
    for preset in [Preset::Fig1a, Preset::Fig1c] {
        let p = preset_problem::<D>(preset, 40).unwrap();
        let tau = D::lit(0.005);
        let n = 8;
        let mut sum = vec![D::zero(); p.op.dofs()];
        for k in 0..n {
            let mut term = local_error_formula(&p.op, &p.initial, &p.source, tau, k, &opts).unwrap();
            for _ in 0..n - k - 1 {
                term = cn_homogeneous_step(&p.op, tau, &term).unwrap();
            }
            for (s, d) in sum.iter_mut().zip(term) {
                *s = *s + d;
            }
        }
        let global = global_error_formula(&p.op, &p.initial, &p.source, tau, n, &opts).unwrap();
        let dev = sum.iter().zip(&global).map(|(a, b)| (*a - *b).abs()).fold(D::zero(), |m, x| m.max(x));
        let scale = global.iter().fold(D::zero(), |m, x| m.max(x.abs()));
        let rel = (dev / scale).to_f64_lossy();
        assert!(rel <= 1e-11, "{preset}: {rel:e}");
    }
}

#[test]
fn stationary_data_has_no_error() {
    let p = preset_problem::<f64>(Preset::Fig5, 100).unwrap();
    let opts = KrylovOptions::default();
    let e = global_error_formula(&p.op, &p.initial, &p.source, 0.01, 5, &opts).unwrap();
    // A u0 + g + f is rounding, so the formula returns rounding
    assert!(common::max_abs(&e) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norms_are_ordered(errors in prop::collection::vec(0.0f64..10.0, 2..60)) {
        let tau = 0.1 / (errors.len() - 1) as f64;
        let all = sup_norm(&errors, tau, NormKind::SupL2 { t_min: 0.0 }).unwrap();
        let late = sup_norm(&errors, tau, NormKind::SupL2 { t_min: 0.02 }).unwrap();
        let last = sup_norm(&errors, tau, NormKind::L2Final).unwrap();
        prop_assert!(all >= late && late >= last);
        let weighted = sup_norm(&errors, tau, NormKind::SupTimeWeighted).unwrap();
        prop_assert!(weighted <= 0.1 * all + 1e-15);
    }

    #[test]
    fn order_is_scale_invariant(logs in prop::collection::vec(-20.0f64..0.0, 2..8), scale in 1e-6f64..1e6) {
        let rows: Vec<(f64, f64)> = logs.iter().enumerate().map(|(k, &e)| (0.02 / 2f64.powi(k as i32), e.exp2())).collect();
        let scaled: Vec<(f64, f64)> = rows.iter().map(|&(t, e)| (t, scale * e)).collect();
        let a = observed_order(&rows).unwrap();
        let b = observed_order(&scaled).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn power_law_gives_its_exponent(q in 0.5f64..4.0, c in 1e-8f64..1e2) {
        let mut t = ConvergenceTable::new("x", "m", "L2");
        for k in 0..7 {
            let tau = 0.02 / 2f64.powi(k);
            t.push(tau, c * tau.powf(q));
        }
        prop_assert!((t.fitted_order().unwrap() - q).abs() < 1e-9);
    }
}
