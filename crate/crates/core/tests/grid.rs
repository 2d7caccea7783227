mod common;

use cnsplit::experiments::{preset_problem, random_field, Preset};
use common::{dense, face, max_abs, max_abs_diff, one_d, two_d, Bc, Spectral};
use nalgebra::DVector;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn two_d_smallest_dirichlet_eigenvalue_near_minus_two_pi_squared() {
    let op = two_d(50, [Bc::dirichlet(0.0), Bc::dirichlet(0.0), Bc::dirichlet(0.0), Bc::dirichlet(0.0)]);
    // inverse iteration on the dense LU: converges to the eigenvalue closest to 0
    let lu = dense(&op).lu();
    let mut x = DVector::from_element(op.dofs(), 1.0);
    let mut mu = 0.0;
    for _ in 0..50 {
        let y = lu.solve(&x).unwrap();
        mu = x.dot(&y) / x.dot(&x);
        x = &y / y.norm();
    }
    let lambda = 1.0 / mu;
    let want = -2.0 * PI * PI;
    assert!(((lambda - want) / want).abs() < 5e-3, "{lambda}");
}

#[test]
fn apply_d_matches_dense_product() {
    let op = one_d(20, Bc::robin(2.0, 1.0, 0.3), Bc::dirichlet(-1.5));
    let u = random_field(op.dofs(), 3);
    let want = dense(&op) * DVector::from_vec(u.clone());
    let got = op.apply_d(&u).unwrap();
    for i in 0..op.dofs() {
        assert_eq!(got[i], want[i] + op.load()[i]);
    }
}

#[test]
fn pure_dirichlet_matrix_is_symmetric() {
    for op in [
        one_d(30, Bc::dirichlet(1.0), Bc::dirichlet(2.0)),
        two_d(12, [Bc::dirichlet(0.0), Bc::dirichlet(1.0), Bc::dirichlet(2.0), Bc::dirichlet(3.0)]),
    ] {
        let a = dense(&op);
        assert_eq!(a.clone() - a.transpose(), a.clone() * 0.0);
    }
}

#[test]
fn neumann_matrix_is_symmetric_in_the_weighted_product() {
    let op = one_d(16, Bc::neumann(0.0), Bc::neumann(0.0));
    let a = dense(&op);
    // the ghost-point rows carry 2/h^2, so A itself is not symmetric
    assert!((a.clone() - a.transpose()).amax() > 0.0);
    let w = nalgebra::DMatrix::from_diagonal(&DVector::from_vec(op.weights().to_vec()));
    let wa = &w * &a;
    assert!((wa.clone() - wa.transpose()).amax() == 0.0);
}

#[test]
fn second_order_consistency_on_sine() {
    let defect = |n: usize| {
        let op = one_d(n, Bc::dirichlet(0.0), Bc::dirichlet(0.0));
        let u = op.sample(|x, _| (PI * x).sin());
        let du = op.apply_d(&u).unwrap();
        let exact = op.sample(|x, _| -PI * PI * (PI * x).sin());
        max_abs_diff(&du, &exact)
    };
    let ratios: Vec<f64> = [20, 40, 80].windows(2).map(|w| defect(w[0]) / defect(w[1])).collect();
    for r in ratios {
        assert!((r - 4.0).abs() < 0.05, "{r}");
    }
}

#[test]
fn robin_stationary_solution_is_second_order() {
    // cos x solves u'' + cos x = 0 with u + du/dn = 1 at x = 0 and
    // cos 1 - sin 1 at x = 1; the ghost row's own defect is only O(h)
    let error = |n: usize| {
        let op = one_d(n, Bc::robin(1.0, 1.0, 1.0), Bc::robin(1.0, 1.0, 1f64.cos() - 1f64.sin()));
        let f = op.sample(|x, _| x.cos());
        let rhs = DVector::from_fn(op.dofs(), |i, _| -(op.load()[i] + f[i]));
        let w = dense(&op).lu().solve(&rhs).unwrap();
        let exact = op.sample(|x, _| x.cos());
        max_abs_diff(w.as_slice(), &exact)
    };
    let r = error(40) / error(80);
    assert!((r - 4.0).abs() < 0.1, "{r}");
}

#[test]
fn shifted_solve_residual_on_random_rhs() {
    let ops = [
        one_d(50, Bc::dirichlet(1.0), Bc::robin(1.0, 1.0, 0.0)),
        two_d(50, [Bc::neumann(0.5), Bc::dirichlet(1.0), Bc::neumann(0.5), Bc::dirichlet(1.0)]),
    ];
    for op in ops {
        let rhs = random_field(op.dofs(), 9);
        let sigma = 1e-2;
        let x = op.shifted_solve(sigma, &rhs).unwrap();
        let ax = op.apply_a(&x).unwrap();
        let residual: Vec<f64> = rhs.iter().zip(&x).zip(&ax).map(|((r, x), ax)| r - (x - sigma * ax)).collect();
        assert!(common::norm2(&residual) <= 1e-12 * common::norm2(&rhs));
    }
}

#[test]
fn fig1c_robin_sign_gives_a_growing_mode() {
    // u - du/dn = 1 on the left face: beta < 0 flips the ghost coupling
    let op = preset_problem::<f64>(Preset::Fig1c, 40).unwrap().op;
    assert!(Spectral::new(&op).max_eigenvalue() > 0.0);
}

#[test]
fn spectral_sign_of_presets() {
    for preset in [Preset::Fig1a, Preset::Fig3a, Preset::Fig3b, Preset::Fig5, Preset::Fig6] {
        let n = if preset.dimension() == 1 { 50 } else { 12 };
        let op = preset_problem::<f64>(preset, n).unwrap().op;
        assert!(Spectral::new(&op).max_eigenvalue() < 0.0, "{preset}");
    }
}

fn compatible(kind: u8, c: f64, alpha: f64) -> Bc {
    match kind % 3 {
        0 => Bc::dirichlet(c),
        1 => Bc::neumann(0.0),
        _ => Bc::robin(alpha, 1.0, alpha * c),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weighted_operator_is_symmetric(kinds in prop::array::uniform4(0u8..3), n in 2usize..9, alpha in 0.1f64..5.0) {
        let op1 = one_d(n, face(kinds[0], 0.3, alpha), face(kinds[1], -0.7, alpha));
        let op2 = two_d(n, kinds.map(|k| face(k, 1.0, alpha)));
        for op in [op1, op2] {
            let a = dense(&op);
            let w = op.weights();
            for i in 0..op.dofs() {
                for j in 0..op.dofs() {
                    let d = w[i] * a[(i, j)] - w[j] * a[(j, i)];
                    prop_assert!(d.abs() <= 1e-12 * a.amax());
                }
            }
        }
    }

    #[test]
    fn constants_are_stationary(kinds in prop::array::uniform4(0u8..3), n in 2usize..12, c in -3.0f64..3.0, alpha in 0.1f64..5.0) {
        let op1 = one_d(n, compatible(kinds[0], c, alpha), compatible(kinds[1], c, alpha));
        let op2 = two_d(n, kinds.map(|k| compatible(k, c, alpha)));
        for op in [op1, op2] {
            let h = 1.0 / n as f64;
            let r = op.apply_d(&vec![c; op.dofs()]).unwrap();
            prop_assert!(max_abs(&r) <= 1e-12 * (1.0 + c.abs()) / (h * h));
        }
    }

    #[test]
    fn eigenvalues_are_negative_unless_all_neumann(kinds in prop::array::uniform4(0u8..3), n in 2usize..10, alpha in 0.1f64..5.0) {
        prop_assume!(kinds.iter().any(|k| k % 3 != 1));
        let op = two_d(n, kinds.map(|k| face(k, 0.0, alpha)));
        prop_assert!(Spectral::new(&op).max_eigenvalue() < 0.0);
    }

    #[test]
    fn steady_state_solves_the_stationary_equation(kinds in prop::array::uniform2(0u8..3), n in 2usize..40, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        prop_assume!(kinds.iter().any(|k| k % 3 != 1));
        let op = one_d(n, face(kinds[0], a, 1.5), face(kinds[1], b, 1.5));
        let w = op.steady_state().unwrap();
        let h = 1.0 / n as f64;
        prop_assert!(max_abs(&op.apply_d(&w).unwrap()) <= 1e-10 / (h * h));
    }
}
