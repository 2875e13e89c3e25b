//! Invariants checked over random parameters.

use proptest::prelude::*;

use qrabi::heun::{hc_coefficients, hc_eval, HeunParams};
use qrabi::judd::{constraint_pair, constraint_value};
use qrabi::oracle::{build_hamiltonian, parity_diagonal};
use qrabi::rabi::{
    eval_K, eval_f, f_values, solution_jets, wronskian, BranchId, Family, FockState, ModelParams, SolutionKind,
};
use qrabi::spectrum::cross_validate;

/// Energy in `[-1, 5]` kept at least 1e-3 away from every `m - g²`.
fn off_pole_energy(g: f64, raw: f64) -> f64 {
    let g2 = g * g;
    let frac = (raw + g2).rem_euclid(1.0);
    if frac < 1e-3 || frac > 1.0 - 1e-3 {
        raw + 0.01
    } else {
        raw
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn series_sum_matches_coefficients(
        alpha in -2.0..2.0f64, beta in -0.9..3.0f64, gamma in -2.0..2.0f64,
        delta in -2.0..2.0f64, eta in -2.0..2.0f64, x in -0.6..0.6f64,
    ) {
        let p = HeunParams::new(alpha, beta, gamma, delta, eta).unwrap();
        let ev = hc_eval(&p, x, 1e-13, 500).unwrap();
        let h = hc_coefficients(&p, 300).unwrap();
        let direct: f64 = h.iter().rev().fold(0.0, |acc, c| acc * x + c);
        prop_assert!((ev.value - direct).abs() <= 1e-11 * direct.abs().max(1.0));
        prop_assert_eq!(hc_eval(&p, 0.0, 1e-12, 500).unwrap().value, 1.0);
    }

    #[test]
    fn f_identities_and_vanishing_k(
        delta in 0.1..2.0f64, g in 0.1..1.2f64, raw_e in -1.0..5.0f64, zf in -0.9..0.9f64,
    ) {
        let m = ModelParams::new(delta, g).unwrap();
        let e = off_pole_energy(g, raw_e);
        let z = zf * g;
        let fv = f_values(e, z, &m).unwrap();
        let s = fv.scale();
        let r = m.ratio(e).unwrap();
        prop_assert!((fv.f[0] - delta * r * fv.f[1]).abs() <= 1e-9 * s);
        prop_assert!((fv.f[3] - (e + g * g) * fv.f[2]).abs() <= 1e-9 * s);
        for family in [Family::Plus, Family::Minus] {
            prop_assert!(eval_K(family, e, z, &m).unwrap().abs() <= 1e-9 * s);
        }
    }

    #[test]
    fn wronskian_mirror_and_reflections(
        delta in 0.1..2.0f64, g in 0.1..1.2f64, raw_e in -1.0..5.0f64, zf in -0.9..0.9f64,
    ) {
        let m = ModelParams::new(delta, g).unwrap();
        let e = off_pole_energy(g, raw_e);
        let z = zf * g;
        let w1 = wronskian(1, e, -z, &m).unwrap();
        let w2 = wronskian(2, e, z, &m).unwrap();
        prop_assert!((w1 - w2).abs() <= 1e-12 * w1.abs().max(1.0));

        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
        let a = eval_f(BranchId::TYPE_I_F1, e, z, &m).unwrap();
        let b = eval_f(BranchId::TYPE_II_F2, e, -z, &m).unwrap();
        prop_assert!(rel(a, b) <= 1e-12);
        let (p, _) = solution_jets(SolutionKind::Symmetric, e, z, &m).unwrap();
        let (_, q) = solution_jets(SolutionKind::Symmetric, e, -z, &m).unwrap();
        prop_assert!(rel(p.value, q.value) <= 1e-12);
        let (p, _) = solution_jets(SolutionKind::Antisymmetric, e, z, &m).unwrap();
        let (_, q) = solution_jets(SolutionKind::Antisymmetric, e, -z, &m).unwrap();
        prop_assert!(rel(p.value, -q.value) <= 1e-12);
    }

    #[test]
    fn hamiltonian_symmetric_and_parity_conserving(delta in 0.0..4.0f64, g in 0.0..4.0f64, n_max in 1usize..40) {
        let m = ModelParams::limiting(delta, g).unwrap();
        let h = build_hamiltonian(&m, n_max).unwrap();
        prop_assert_eq!(&h, &h.transpose());
        let p = parity_diagonal(n_max);
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                prop_assert!(h[(i, j)] == 0.0 || p[i] == p[j]);
            }
        }
    }

    #[test]
    fn first_curve_is_the_circle(g in 0.01..0.49f64) {
        let delta = (1.0 - 4.0 * g * g).sqrt();
        let m = ModelParams::new(delta, g).unwrap();
        prop_assert!(constraint_value(1, &m).unwrap().abs() < 1e-9);
        let (a, b) = constraint_pair(1, &m).unwrap();
        prop_assert!(a.abs() < 1e-9 && b.abs() < 1e-9);
    }

    #[test]
    fn cross_validation_keeps_identical_lists(mut roots in prop::collection::vec(-1.0..6.0f64, 0..12)) {
        roots.sort_by(f64::total_cmp);
        let cv = cross_validate(&[(0.0, roots.clone()), (0.3, roots.clone())], 1e-8).unwrap();
        prop_assert_eq!(cv.accepted, roots);
        prop_assert!(cv.rejected.is_empty());
    }

    #[test]
    fn normalized_states_have_unit_norm(up in prop::collection::vec(-5.0..5.0f64, 1..20)) {
        let down: Vec<f64> = up.iter().map(|x| 0.5 * x + 1.0).collect();
        let s = FockState::new(up, down).unwrap().normalized().unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-14);
        prop_assert!(s.parity_expectation().abs() <= 1.0 + 1e-14);
    }
}
