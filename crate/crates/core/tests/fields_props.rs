//! Bracket identities and the hand-expanded bracket of two split generators.

use proptest::prelude::*;
use qhds::algebra::{ratio, Var, ZeroTestConfig};
use qhds::contact::{split_generators, verify_contact_symmetry};
use qhds::fields::{lie_bracket, FieldKind};
use qhds::jet::{build_system, JetPoint};
use qhds::report::Verdict;
use qhds::sample::{contact_field, jet_vars, point_field, point_vars, polynomial, rng, safe_point, tensor};
use qhds::{CoeffTensor, ContactSpec, Expr, SystemRhs, VectorField};
use rand::Rng;

fn exact_zero(v: &VectorField) -> bool {
    v.to_polys().is_some_and(|ps| ps.iter().all(|p| p.is_zero()))
}

fn br(v: &VectorField, w: &VectorField) -> VectorField {
    lie_bracket(v, w).unwrap()
}

/// The bracket of `K_a(∂x_a + Σ_j L^j_a ∂p_j)` and `K_b(∂x_b + …)` expanded
/// term by term, with `L^j_a = Σ_k (a^j_ak + a^j_ka) x_k`. Returns the
/// component values at `z` in the order `t, x.., p..`.
fn expanded_bracket(sys: &SystemRhs, a: usize, b: usize, ka: &Expr, kb: &Expr, z: &JetPoint) -> Vec<f64> {
    let n = sys.dim();
    let ev = |e: &Expr| e.evaluate(z).unwrap();
    let l = |j: usize, m: usize| sys.linear_form(j, m).eval_f64(z).unwrap();
    let d = |e: &Expr, v: Var| ev(&e.differentiate(v));
    let (ka_v, kb_v) = (ev(ka), ev(kb));
    let kb_xa = d(kb, Var::X(a));
    let ka_xb = d(ka, Var::X(b));
    let kb_p: f64 = (1..=n).map(|j| d(kb, Var::P(j))).sum();
    let ka_p: f64 = (1..=n).map(|j| d(ka, Var::P(j))).sum();
    let mut out = vec![0.0; 2 * n + 1];
    out[b] += ka_v * kb_xa + ka_v * (1..=n).map(|j| d(kb, Var::P(j)) * l(j, a)).sum::<f64>();
    out[a] -= kb_v * ka_xb + kb_v * (1..=n).map(|j| d(ka, Var::P(j)) * l(j, b)).sum::<f64>();
    for j in 1..=n {
        out[n + j] = ka_v * kb_xa * l(j, b) - kb_v * ka_xb * l(j, a) + ka_v * kb_p * l(j, a) * l(j, b)
            - kb_v * ka_p * l(j, b) * l(j, a);
    }
    out
}

fn split_pair(sys: &SystemRhs, ks: Vec<Expr>) -> Vec<VectorField> {
    split_generators(sys, &ContactSpec::new(Expr::zero(), ks)).unwrap()
}

fn max_gap(sys: &SystemRhs, a: usize, b: usize, ks: &[Expr], z: &JetPoint) -> f64 {
    let gens = split_pair(sys, ks.to_vec());
    let computed = br(&gens[a], &gens[b]).eval(z).unwrap();
    let expected = expanded_bracket(sys, a, b, &ks[a - 1], &ks[b - 1], z);
    computed.iter().zip(&expected).map(|(c, e)| (c - e).abs()).fold(0.0, f64::max)
}

#[test]
fn expanded_bracket_agrees_for_point_coefficients() {
    for seed in 0..20u64 {
        let mut r = rng(seed);
        let n = r.random_range(1..=3);
        let sys = build_system(tensor(&mut r, n, 3)).unwrap();
        let ks: Vec<Expr> = (0..n).map(|_| polynomial(&mut r, &point_vars(n), 2, 3, 3)).collect();
        let (a, b) = (r.random_range(1..=n), r.random_range(1..=n));
        let z = safe_point(&mut r, n);
        let gap = max_gap(&sys, a, b, &ks, &z);
        assert!(gap <= 1e-9, "seed {seed}: gap {gap}");
    }
}

#[test]
fn expanded_bracket_misses_terms_for_derivative_coefficients() {
    // K1 = p2, K2 = 1 on the decoupled squares: the ∂p1 component is
    // -4 x1 x2 but the expansion gives 0.
    let sys = build_system(CoeffTensor::decoupled_squares(2)).unwrap();
    let ks = [Expr::p(2), Expr::one()];
    let z = JetPoint::new(0.5, vec![1.0, 1.5], vec![0.7, 1.1]);
    let gens = split_pair(&sys, ks.to_vec());
    let computed = br(&gens[1], &gens[2]);
    assert_eq!(computed.p_coeff(1).to_string(), "-4*x1*x2");
    assert!((max_gap(&sys, 1, 2, &ks, &z) - 6.0).abs() <= 1e-12);

    let disagreeing = (0..20u64)
        .filter(|&seed| {
            let mut r = rng(seed);
            let sys = build_system(tensor(&mut r, 2, 3)).unwrap();
            let ks: Vec<Expr> = (0..2).map(|_| polynomial(&mut r, &jet_vars(2), 2, 3, 3)).collect();
            let z = safe_point(&mut r, 2);
            max_gap(&sys, 1, 2, &ks, &z) > 1e-9
        })
        .count();
    assert!(disagreeing > 0);
}

#[test]
fn split_generators_are_symmetries() {
    let cfg = ZeroTestConfig::default();
    for seed in 0..20u64 {
        let mut r = rng(seed);
        let n = r.random_range(1..=3);
        let sys = build_system(tensor(&mut r, n, 3)).unwrap();
        let spec = qhds::sample::contact_spec(&mut r, n, 2);
        for g in split_generators(&sys, &spec).unwrap() {
            assert_eq!(verify_contact_symmetry(&sys, &g, &cfg).verdict, Verdict::Pass, "seed {seed}: {g}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn antisymmetry_and_jacobi(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let (u, v, w) = (contact_field(&mut r, n, 2), contact_field(&mut r, n, 2), contact_field(&mut r, n, 2));
        prop_assert!(exact_zero(&br(&u, &v).add(&br(&v, &u)).unwrap()));
        let jacobi = br(&u, &br(&v, &w)).add(&br(&v, &br(&w, &u))).unwrap().add(&br(&w, &br(&u, &v))).unwrap();
        prop_assert!(exact_zero(&jacobi));
    }

    #[test]
    fn bilinearity(seed in any::<u64>(), n in 1usize..=3, a in -4i64..=4, b in 1i64..=3) {
        let mut r = rng(seed);
        let (u, v, w) = (contact_field(&mut r, n, 2), contact_field(&mut r, n, 2), contact_field(&mut r, n, 2));
        let (c, d) = (ratio(a, b), ratio(b, 2));
        let lhs = br(&u.combine(&c, &v, &d).unwrap(), &w);
        let rhs = br(&u, &w).combine(&c, &br(&v, &w), &d).unwrap();
        prop_assert!(exact_zero(&lhs.sub(&rhs).unwrap()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn prolongation_commutes_with_bracket(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let (v, w) = (point_field(&mut r, n, 2), point_field(&mut r, n, 2));
        let inner = br(&v, &w).with_kind(FieldKind::Point).unwrap().prolong().unwrap();
        let outer = br(&v.prolong().unwrap(), &w.prolong().unwrap());
        prop_assert!(exact_zero(&inner.sub(&outer).unwrap()));
    }
}
