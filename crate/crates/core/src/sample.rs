//! Seeded random tensors, polynomial coefficients, fields and jet points.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Expr, Rational, Var, SAMPLE_HI, SAMPLE_LO};
use crate::contact::ContactSpec;
use crate::fields::VectorField;
use crate::jet::{CoeffTensor, JetPoint};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational in `[-bound, bound]` with denominator 1 or 2.
pub fn small_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    let den: i64 = rng.random_range(1..=2);
    Rational::new(BigInt::from(rng.random_range(-bound * den..=bound * den)), BigInt::from(den))
}

/// Sparse tensor with entries in `[-bound, bound]`; each slot is nonzero with
/// probability one half.
pub fn tensor(rng: &mut impl Rng, n: usize, bound: i64) -> CoeffTensor {
    let mut t = CoeffTensor::zeros(n);
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                if rng.random_bool(0.5) {
                    t.set(i, j, k, small_rational(rng, bound));
                }
            }
        }
    }
    t
}

/// Random polynomial of total degree ≤ `degree` in `vars`, with at most
/// `terms` monomials and coefficients in `[-bound, bound]`.
pub fn polynomial(rng: &mut impl Rng, vars: &[Var], degree: u32, terms: usize, bound: i64) -> Expr {
    let count = rng.random_range(0..=terms);
    Expr::sum((0..count).map(|_| {
        let deg = rng.random_range(0..=degree);
        let mut factors = vec![Expr::Const(small_rational(rng, bound))];
        if !vars.is_empty() {
            for _ in 0..deg {
                factors.push(Expr::Var(vars[rng.random_range(0..vars.len())]));
            }
        }
        Expr::product(factors)
    }))
    .normalize()
}

pub fn point_vars(n: usize) -> Vec<Var> {
    std::iter::once(Var::T).chain((1..=n).map(Var::X)).collect()
}

pub fn jet_vars(n: usize) -> Vec<Var> {
    Var::jet_coords(n)
}

/// `T, K` polynomial over `(t, x, p)` of degree ≤ `degree`.
pub fn contact_spec(rng: &mut impl Rng, n: usize, degree: u32) -> ContactSpec {
    let vars = jet_vars(n);
    let t = polynomial(rng, &vars, degree, 3, 3);
    let k = (0..n).map(|_| polynomial(rng, &vars, degree, 3, 3)).collect();
    ContactSpec::new(t, k)
}

/// Point field with polynomial `T, K` over `(t, x)`.
pub fn point_field(rng: &mut impl Rng, n: usize, degree: u32) -> VectorField {
    let vars = point_vars(n);
    let t = polynomial(rng, &vars, degree, 3, 3);
    let k = (0..n).map(|_| polynomial(rng, &vars, degree, 3, 3)).collect();
    VectorField::point(n, t, k).expect("point variables only")
}

/// Arbitrary polynomial field on the jet space.
pub fn contact_field(rng: &mut impl Rng, n: usize, degree: u32) -> VectorField {
    let vars = jet_vars(n);
    let mut poly = || polynomial(rng, &vars, degree, 3, 3);
    let t = poly();
    let k = (0..n).map(|_| poly()).collect();
    let p = (0..n).map(|_| poly()).collect();
    VectorField::contact(n, t, k, p).expect("jet variables only")
}

/// Point of the safe box: `t ∈ [0, 1]`, `x, p ∈ [1/2, 2]`.
pub fn safe_point(rng: &mut impl Rng, n: usize) -> JetPoint {
    let t = rng.random_range(0.0..=1.0);
    let x = (0..n).map(|_| rng.random_range(SAMPLE_LO..=SAMPLE_HI)).collect();
    let p = (0..n).map(|_| rng.random_range(SAMPLE_LO..=SAMPLE_HI)).collect();
    JetPoint::new(t, x, p)
}

/// The safe-box point drawn from `seed` alone.
pub fn seeded_point(seed: u64, n: usize) -> JetPoint {
    safe_point(&mut rng(seed), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(tensor(&mut rng(4), 3, 3), tensor(&mut rng(4), 3, 3));
        assert_eq!(contact_spec(&mut rng(4), 2, 2), contact_spec(&mut rng(4), 2, 2));
        assert_eq!(seeded_point(9, 2), seeded_point(9, 2));
    }

    #[test]
    fn ranges() {
        let mut r = rng(1);
        for _ in 0..50 {
            let t = tensor(&mut r, 2, 3);
            for (_, _, _, v) in t.nonzero_entries() {
                assert!(v <= Rational::from_integer(3.into()) && v >= Rational::from_integer((-3).into()));
            }
            let z = safe_point(&mut r, 3);
            assert!((0.0..=1.0).contains(&z.t));
            assert!(z.x.iter().chain(&z.p).all(|v| (SAMPLE_LO..=SAMPLE_HI).contains(v)));
            let e = polynomial(&mut r, &point_vars(2), 2, 3, 3);
            assert!(e.to_poly(2).is_some_and(|p| p.degree().unwrap_or(0) <= 2));
            assert!(!e.depends_on(Var::P(1)));
        }
    }
}
