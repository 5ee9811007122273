//! Zero testing for symbolic expressions.
//!
//! Exact on the polynomial fragment, otherwise Schwartz–Zippel style: evaluate
//! at seeded random points of a box where `ln` and reciprocals stay defined.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::var::Var;

/// Sampling box for every free variable.
pub const SAMPLE_LO: f64 = 0.5;
pub const SAMPLE_HI: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTestConfig {
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig { trials: 20, tol: 1e-9, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: BTreeMap<Var, f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroTest {
    /// Canonical polynomial form is empty.
    ExactZero,
    /// Every sample stayed within tolerance.
    ProbablyZero {
        trials: usize,
    },
    NonZero {
        witness: Witness,
    },
    /// Every sample hit an evaluation domain error.
    Undetermined {
        attempts: usize,
    },
}

impl ZeroTest {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroTest::ExactZero | ZeroTest::ProbablyZero { .. })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ZeroTest::ExactZero)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            ZeroTest::NonZero { witness } => Some(witness),
            _ => None,
        }
    }
}

/// Decides whether `e` vanishes identically.
///
/// Domain errors at a sample trigger resampling, capped at `10 × trials`
/// attempts. A polynomial with a non-empty canonical form is always reported
/// `NonZero`, with the largest-magnitude sample as witness if none exceeded `tol`.
pub fn is_zero(e: &Expr, cfg: &ZeroTestConfig) -> ZeroTest {
    assert!(cfg.trials >= 1, "zero test needs at least one trial");
    assert!(cfg.tol > 0.0, "zero test tolerance must be positive");
    let poly = e.to_poly(e.max_index());
    if poly.as_ref().is_some_and(|p| p.is_zero()) {
        return ZeroTest::ExactZero;
    }
    let vars: Vec<Var> = e.free_vars().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut valid = 0;
    let mut attempts = 0;
    let mut best: Option<Witness> = None;
    while valid < cfg.trials && attempts < 10 * cfg.trials {
        attempts += 1;
        let point: BTreeMap<Var, f64> = vars.iter().map(|&v| (v, rng.random_range(SAMPLE_LO..=SAMPLE_HI))).collect();
        let Ok(value) = e.evaluate(&point) else {
            continue;
        };
        valid += 1;
        if value.abs() > cfg.tol {
            return ZeroTest::NonZero { witness: Witness { point, value } };
        }
        if best.as_ref().is_none_or(|b| value.abs() > b.value.abs()) {
            best = Some(Witness { point, value });
        }
    }
    match (poly, best) {
        (Some(_), Some(witness)) => ZeroTest::NonZero { witness },
        (_, None) => ZeroTest::Undetermined { attempts },
        (None, Some(_)) => ZeroTest::ProbablyZero { trials: valid },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::rat;

    #[test]
    fn exp_identity_is_probably_zero() {
        let e = Expr::exp(Expr::x(1)) * Expr::exp(-Expr::x(1)) - Expr::one();
        assert!(matches!(is_zero(&e, &ZeroTestConfig::default()), ZeroTest::ProbablyZero { trials: 20 }));
    }

    #[test]
    fn canonical_cancellation_is_exact() {
        let e = Expr::pow(Expr::x(1), 2) - Expr::x(1) * Expr::x(1);
        assert_eq!(is_zero(&e, &ZeroTestConfig::default()), ZeroTest::ExactZero);
    }

    #[test]
    fn nonzero_has_witness() {
        // -c² t x1 with c = 1
        let c = rat(1);
        let e = -(Expr::Const(&c * &c) * Expr::t() * Expr::x(1));
        let r = is_zero(&e, &ZeroTestConfig::default());
        let w = r.witness().expect("witness");
        let expected = -w.point[&Var::T] * w.point[&Var::X(1)];
        assert!((w.value - expected).abs() < 1e-15);
        assert!(w.value < 0.0);
    }

    #[test]
    fn tiny_polynomial_still_nonzero() {
        let e = Expr::x(1).scale(&crate::algebra::ratio(1, 1_000_000_000_000));
        assert!(matches!(is_zero(&e, &ZeroTestConfig::default()), ZeroTest::NonZero { .. }));
    }

    #[test]
    fn domain_errors_resample_then_give_up() {
        let e = Expr::ln(-Expr::x(1));
        assert_eq!(
            is_zero(&e, &ZeroTestConfig { trials: 3, ..Default::default() }),
            ZeroTest::Undetermined { attempts: 30 }
        );
    }

    #[test]
    fn seeded_runs_repeat() {
        let e = Expr::exp(Expr::x(1)) - Expr::x(2);
        let cfg = ZeroTestConfig { seed: 7, ..Default::default() };
        assert_eq!(is_zero(&e, &cfg), is_zero(&e, &cfg));
    }
}
