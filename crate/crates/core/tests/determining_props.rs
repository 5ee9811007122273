//! Completeness and monotonicity of the polynomial point-symmetry solver.

use proptest::prelude::*;
use qhds::algebra::{linsolve, rat, Rational};
use qhds::determining::{solve_point_symmetries, symmetry_residual, Mode, SymmetryBasis};
use qhds::jet::build_system;
use qhds::sample::{rng, tensor};
use qhds::{SystemRhs, VectorField};
use rand::Rng;

fn residual_vanishes(sys: &SystemRhs, v: &VectorField, mode: Mode) -> bool {
    symmetry_residual(sys, v, mode).unwrap().iter().all(|r| r.to_poly(sys.dim()).is_some_and(|p| p.is_zero()))
}

fn random_system(r: &mut impl Rng) -> SystemRhs {
    let n = r.random_range(1..=2);
    build_system(tensor(r, n, 3)).unwrap()
}

fn combination(basis: &SymmetryBasis, weights: &[i64]) -> Vec<Rational> {
    let m = basis.ansatz.unknown_count();
    let mut c = vec![rat(0); m];
    for (b, w) in basis.coefficient_vectors().iter().zip(weights) {
        for (ci, bi) in c.iter_mut().zip(b) {
            *ci += bi * rat(*w);
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn span_is_exactly_the_solution_set(seed in any::<u64>(), on_shell in any::<bool>()) {
        let mut r = rng(seed);
        let sys = random_system(&mut r);
        let mode = if on_shell { Mode::OnShell } else { Mode::Strict };
        let basis = solve_point_symmetries(&sys, 2, mode);
        let m = basis.ansatz.unknown_count();

        let weights: Vec<i64> = (0..basis.dim()).map(|_| r.random_range(-5..=5)).collect();
        let inside = combination(&basis, &weights);
        prop_assert!(residual_vanishes(&sys, &basis.ansatz.field(&inside), mode));

        let outside: Vec<Rational> = (0..m).map(|_| rat(r.random_range(-3..=3))).collect();
        let mut stacked = basis.coefficient_vectors().to_vec();
        stacked.push(outside.clone());
        let in_span = linsolve::rank(&stacked, m) == basis.dim();
        prop_assert_eq!(residual_vanishes(&sys, &basis.ansatz.field(&outside), mode), in_span);
    }

    #[test]
    fn strict_solutions_hold_on_shell(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = random_system(&mut r);
        let strict = solve_point_symmetries(&sys, 2, Mode::Strict);
        let on_shell = solve_point_symmetries(&sys, 2, Mode::OnShell);
        prop_assert!(strict.dim() <= on_shell.dim());
        for f in &strict.fields {
            prop_assert!(residual_vanishes(&sys, f, Mode::OnShell));
        }
    }

    #[test]
    fn dimension_grows_with_degree(seed in any::<u64>(), on_shell in any::<bool>()) {
        let mut r = rng(seed);
        let sys = random_system(&mut r);
        let mode = if on_shell { Mode::OnShell } else { Mode::Strict };
        let dims: Vec<usize> = (0..=2).map(|d| solve_point_symmetries(&sys, d, mode).dim()).collect();
        prop_assert!(dims.windows(2).all(|w| w[0] <= w[1]), "{dims:?}");
        let low = solve_point_symmetries(&sys, 1, mode);
        for f in &low.fields {
            prop_assert!(residual_vanishes(&sys, f, mode));
        }
    }

    #[test]
    fn time_translation_always_present(seed in any::<u64>(), on_shell in any::<bool>()) {
        let mut r = rng(seed);
        let sys = random_system(&mut r);
        let mode = if on_shell { Mode::OnShell } else { Mode::Strict };
        let basis = solve_point_symmetries(&sys, 1, mode);
        let m = basis.ansatz.unknown_count();
        let mut dt = vec![rat(0); m];
        dt[0] = rat(1);
        let mut stacked = basis.coefficient_vectors().to_vec();
        stacked.push(dt);
        prop_assert_eq!(linsolve::rank(&stacked, m), basis.dim());
    }
}
