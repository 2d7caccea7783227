mod common;

use cnsplit::experiments::random_field;
use cnsplit::flows::{
    diffusion_flow_exact, diffusion_step_cn, diffusion_step_cn_stage_form, diffusion_step_rational, CnForm,
    DiffusionPropagator,
};
use cnsplit::krylov::KrylovOptions;
use cnsplit::scalar::Real;
use cnsplit::stability::StabilityFunction;
use common::{face, max_abs, max_abs_diff, norm2, one_d, two_d, Bc, Op, Spectral};
use proptest::prelude::*;

fn dirichlet_50() -> Op {
    one_d(50, Bc::dirichlet(0.5), Bc::dirichlet(-1.0))
}

fn minus(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[test]
fn cn_routes_agree_on_random_fields() {
    let op = dirichlet_50();
    let cn = StabilityFunction::crank_nicolson();
    for seed in 0..20 {
        let u = random_field(op.dofs(), seed);
        let a = diffusion_step_cn(&op, 0.01, &u).unwrap();
        let b = diffusion_step_cn_stage_form(&op, 0.01, &u).unwrap();
        let c = diffusion_step_rational(&op, &cn, 0.01, &u).unwrap();
        assert!(max_abs_diff(&a, &b) <= 1e-12);
        assert!(max_abs_diff(&a, &c) <= 1e-12);
    }
}

#[test]
fn cn_step_is_r_of_tau_a_on_the_shifted_field() {
    let op = one_d(50, Bc::robin(1.0, 1.0, 2.0), Bc::dirichlet(1.0));
    let spec = Spectral::new(&op);
    let w = op.steady_state().unwrap();
    let tau = 0.005;
    let r = |y: f64| (1.0 + y / 2.0) / (1.0 - y / 2.0);
    let u = random_field(op.dofs(), 1);
    let got = minus(&diffusion_step_cn(&op, tau, &u).unwrap(), &w);
    let want = spec.apply(|l| r(tau * l), &minus(&u, &w));
    assert!(max_abs_diff(&got, &want) <= 1e-12 * max_abs(&want).max(1.0));
}

#[test]
fn rational_presets_match_their_scalar_functions() {
    let op = dirichlet_50();
    let spec = Spectral::new(&op);
    let w = op.steady_state().unwrap();
    let tau = 0.004;
    let u = random_field(op.dofs(), 2);
    for r in [
        StabilityFunction::gauss2(),
        StabilityFunction::radau1a2(),
        StabilityFunction::lobatto3c2(),
        StabilityFunction::implicit_euler(),
    ] {
        let got = minus(&diffusion_step_rational(&op, &r, tau, &u).unwrap(), &w);
        let want = spec.apply(|l| r.eval_real(tau * l).unwrap(), &minus(&u, &w));
        assert!(max_abs_diff(&got, &want) <= 1e-11 * max_abs(&want).max(1.0), "{}", r.name());
    }
}

#[test]
fn krylov_matches_dense_eigensolve() {
    let op = dirichlet_50();
    let spec = Spectral::new(&op);
    let w = op.steady_state().unwrap();
    let t = 0.02;
    for seed in 0..5 {
        let u = random_field(op.dofs(), 40 + seed);
        let got = minus(&diffusion_flow_exact(&op, t, &u, &KrylovOptions::default()).unwrap(), &w);
        let want = spec.apply(|l| (t * l).exp(), &minus(&u, &w));
        assert!(norm2(&minus(&got, &want)) <= 1e-11 * norm2(&want));
    }
}

#[test]
fn exact_flow_at_zero_time_is_identity() {
    let op = dirichlet_50();
    let u = random_field(op.dofs(), 5);
    assert_eq!(diffusion_flow_exact(&op, 0.0, &u, &KrylovOptions::default()).unwrap(), u);
}

#[test]
fn exact_flow_semigroup() {
    let op = two_d(12, [Bc::neumann(0.5), Bc::dirichlet(1.0), Bc::robin(2.0, 1.0, 0.0), Bc::dirichlet(0.0)]);
    let opts = KrylovOptions::default();
    let w = op.steady_state().unwrap();
    let u = random_field(op.dofs(), 8);
    let whole = diffusion_flow_exact(&op, 0.03, &u, &opts).unwrap();
    let split = diffusion_flow_exact(&op, 0.02, &diffusion_flow_exact(&op, 0.01, &u, &opts).unwrap(), &opts).unwrap();
    let scale = norm2(&minus(&u, &w));
    assert!(norm2(&minus(&whole, &split)) <= 2.0 * f64::default_tolerance() * scale);
}

fn propagators() -> Vec<DiffusionPropagator<f64>> {
    vec![
        DiffusionPropagator::CrankNicolson(CnForm::TwoSolve),
        DiffusionPropagator::CrankNicolson(CnForm::StageForm),
        DiffusionPropagator::Rational(StabilityFunction::gauss2()),
        DiffusionPropagator::Rational(StabilityFunction::radau1a2()),
        DiffusionPropagator::Rational(StabilityFunction::lobatto3c2()),
        DiffusionPropagator::exact(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn steady_state_is_a_fixed_point(kinds in prop::array::uniform2(0u8..3), a in -2.0f64..2.0, b in -2.0f64..2.0, k in 0u32..7) {
        prop_assume!(kinds.iter().any(|k| k % 3 != 1));
        let op = one_d(40, face(kinds[0], a, 1.0), face(kinds[1], b, 1.0));
        let w = op.steady_state().unwrap();
        let tau = 0.02 / 2f64.powi(k as i32);
        let scale = max_abs(&w).max(1.0);
        for p in propagators() {
            let out = p.prepare(&op, tau).unwrap().apply(&w).unwrap();
            prop_assert!(max_abs_diff(&out, &w) <= 1e-12 * scale, "{p:?}");
        }
    }

    #[test]
    fn homogeneous_part_contracts(seed in 0u64..1000, k in 0u32..7) {
        let op = dirichlet_50();
        let w = op.steady_state().unwrap();
        let u = random_field(op.dofs(), seed);
        let before = norm2(&minus(&u, &w));
        let tau = 0.02 / 2f64.powi(k as i32);
        for p in propagators() {
            let out = p.prepare(&op, tau).unwrap().apply(&u).unwrap();
            prop_assert!(norm2(&minus(&out, &w)) <= before * (1.0 + 1e-12), "{p:?}");
        }
    }
}
