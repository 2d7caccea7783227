mod common;

use cnsplit::experiments::{
    compute_reference, exit_code, preset_problem, run_experiment, stationary_residual, ExperimentSpec, Preset,
    ReferenceKind, ReferenceSolver, SpectralExponential, REFERENCE_TAU,
};
use cnsplit::{DoubleDouble, Error, NormKind};
use common::{max_abs, max_abs_diff, norm2};

#[test]
fn fig5_initial_field_is_stationary() {
    // in f64 the second difference of x^2/2 at h = 1e-3 carries about
    // eps / h^2 of rounding, so the 1e-12 level is checked in double-double
    let dd = preset_problem::<DoubleDouble>(Preset::Fig5, 1000).unwrap();
    let r = stationary_residual(&dd, &dd.initial).unwrap();
    assert!(r.hi() <= 1e-12, "{r:e}");
    let p = preset_problem::<f64>(Preset::Fig5, 1000).unwrap();
    let r = stationary_residual(&p, &p.initial).unwrap();
    let floor = 4.0 * f64::EPSILON * max_abs(&p.initial) * 1e6;
    assert!(r <= floor, "{r:e} above rounding floor {floor:e}");
}

#[test]
fn fig6_residual_is_second_order() {
    let residual = |n| {
        let p = preset_problem::<f64>(Preset::Fig6, n).unwrap();
        stationary_residual(&p, &p.initial).unwrap()
    };
    let ratio = residual(50) / residual(100);
    assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
}

#[test]
fn fig1_initial_field_meets_the_boundary_data() {
    let p = preset_problem::<f64>(Preset::Fig1a, 200).unwrap();
    assert_eq!(max_abs(&p.op.apply_d(&p.initial).unwrap()), 0.0);
    assert!(p.op.to_full(&p.initial).unwrap().iter().all(|&v| v == 1.0));
}

#[test]
fn reference_is_constant_on_stationary_problem() {
    let p = preset_problem::<f64>(Preset::Fig5, 200).unwrap();
    let traj = compute_reference(&p, &ReferenceSolver::for_dimension(1), 64).unwrap();
    for (_, u) in &traj.snapshots {
        assert!(max_abs_diff(u, &p.initial) <= 1e-13);
    }
}

#[test]
fn fig1_reference_matches_semi_discrete_solution() {
    let p = preset_problem::<f64>(Preset::Fig1a, 100).unwrap();
    let traj = compute_reference(&p, &ReferenceSolver::for_dimension(1), 1024).unwrap();
    let spectral = SpectralExponential::new(&p.op).unwrap();
    let f = p.source.as_field(p.op.dofs()).unwrap();
    // w solves A w + g + f = 0, from a dense solve
    let a = common::dense(&p.op);
    let rhs = nalgebra::DVector::from_fn(p.op.dofs(), |i, _| -(p.op.load()[i] + f[i]));
    let w = a.lu().solve(&rhs).unwrap();
    let d: Vec<f64> = p.initial.iter().zip(w.iter()).map(|(u, w)| u - w).collect();
    let exact: Vec<f64> = spectral.apply(0.1, &d).iter().zip(w.iter()).map(|(e, w)| e + w).collect();
    let err = norm2(&traj.final_state().iter().zip(&exact).map(|(a, b)| a - b).collect::<Vec<_>>());
    assert!(err <= 1e-8 * norm2(&exact), "{:e}", err / norm2(&exact));
}

#[test]
fn reference_self_convergence() {
    let p = preset_problem::<f64>(Preset::Fig1a, 100).unwrap();
    let coarse = compute_reference(&p, &ReferenceSolver::for_dimension(1), 1024).unwrap();
    let half = ReferenceSolver { kind: ReferenceKind::Cn1d, tau: REFERENCE_TAU / 2.0 };
    let fine = compute_reference(&p, &half, 2048).unwrap();
    let (a, b) = (coarse.final_state(), fine.final_state());
    assert!(norm2(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>()) <= 1e-9 * norm2(b));
}

#[test]
fn rk4_and_trapezoid_references_agree_in_two_d() {
    let p = preset_problem::<f64>(Preset::Fig3b, 16).unwrap();
    let rk4 = compute_reference(&p, &ReferenceSolver::for_dimension(2), 1024).unwrap();
    let trap = compute_reference(&p, &ReferenceSolver { kind: ReferenceKind::Cn1d, tau: REFERENCE_TAU }, 1024).unwrap();
    assert!(max_abs_diff(rk4.final_state(), trap.final_state()) <= 1e-8);
}

#[test]
fn rk4_guard_rejects_large_steps() {
    let p = preset_problem::<f64>(Preset::Fig3a, 50).unwrap();
    let solver = ReferenceSolver { kind: ReferenceKind::Rk4TwoD, tau: 1e-3 };
    assert!(matches!(compute_reference(&p, &solver, 1), Err(Error::Rk4Unstable { .. })));
}

#[test]
fn reference_stride_must_divide_the_step_count() {
    let p = preset_problem::<f64>(Preset::Fig1a, 20).unwrap();
    assert!(compute_reference(&p, &ReferenceSolver::for_dimension(1), 3000).is_err());
}

fn small_spec(preset: Preset) -> ExperimentSpec {
    ExperimentSpec { intervals: Some(40), taus: Some(vec![0.02, 0.01, 0.005]), ..ExperimentSpec::new(preset) }
}

#[test]
fn identical_specs_give_identical_csv() {
    let spec = small_spec(Preset::Fig2a);
    let render = || {
        let mut buf = Vec::new();
        run_experiment(&spec).unwrap().write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(render(), render());
}

#[test]
fn csv_has_one_row_per_method_tau_and_norm() {
    let spec = ExperimentSpec {
        methods: Some(vec!["StrangCN".into(), "StrangEXP".into()]),
        norms: Some(vec![NormKind::L2Final, NormKind::SupL2 { t_min: 0.02 }, NormKind::SupTimeWeighted]),
        ..small_spec(Preset::Fig1b)
    };
    let mut buf = Vec::new();
    run_experiment(&spec).unwrap().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("experiment,method,norm,tau,error"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 3 * 3);
    assert!(rows.iter().all(|r| r.starts_with("fig1b,Strang")));
}

#[test]
fn files_are_written() {
    let dir = std::env::temp_dir().join(format!("cnsplit-files-{}", std::process::id()));
    let spec = ExperimentSpec { out_dir: Some(dir.clone()), ..small_spec(Preset::Fig6) };
    run_experiment(&spec).unwrap();
    for ext in ["csv", "verdicts.ndjson", "meta.json"] {
        let path = dir.join(format!("fig6.{ext}"));
        assert!(path.metadata().unwrap().len() > 0, "{}", path.display());
    }
    let verdicts = std::fs::read_to_string(dir.join("fig6.verdicts.ndjson")).unwrap();
    for line in verdicts.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["pass"].is_boolean() && v["predicate"].is_string());
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("fig6.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["final_time"], 0.1);
    assert!(meta["notes"][0].as_str().unwrap().contains("+u"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_step_is_a_run_failure() {
    let spec = ExperimentSpec { taus: Some(vec![0.03]), ..small_spec(Preset::Fig1a) };
    let result = run_experiment(&spec);
    assert!(result.is_err());
    assert_eq!(exit_code(&result), 2);
}

#[test]
fn failed_predicate_gives_exit_code_one() {
    // at tau = 0.02 alone the StrangEXP error of fig5 sits above 1e-3
    let spec = ExperimentSpec {
        intervals: Some(200),
        methods: Some(vec!["StrangEXP".into()]),
        taus: Some(vec![0.02]),
        ..ExperimentSpec::new(Preset::Fig5)
    };
    let result = run_experiment(&spec);
    let report = result.as_ref().unwrap();
    assert!(!report.passed(), "{:?}", report.verdicts);
    assert_eq!(exit_code(&result), 1);
}

#[test]
fn preset_names_round_trip() {
    for name in ["fig1a", "fig1b", "fig1c", "fig2a", "fig2b", "fig3a", "fig3b", "fig5", "fig6", "bounds", "oracle"] {
        let p: Preset = name.parse().unwrap();
        assert_eq!(p.to_string(), name);
    }
    assert!("fig4".parse::<Preset>().is_err());
    assert!(preset_problem::<f64>(Preset::Bounds, 10).is_err());
}
