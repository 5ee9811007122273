//! Exact arithmetic and symbolic expressions over jet coordinates.

mod expr;
pub mod linsolve;
mod parse;
mod poly;
mod rational;
mod var;
mod zero;

pub use expr::{Bindings, EvalError, Expr, FnBindings};
pub use parse::{parse_expr, ParseError};
pub use poly::{poly_arith, Monomial, Poly, PolyOp};
pub use rational::{parse_rational, rat, ratio, serde_str, to_f64, Rational, RationalParseError};
pub use var::{Var, VarParseError};
pub use zero::{is_zero, Witness, ZeroTest, ZeroTestConfig, SAMPLE_HI, SAMPLE_LO};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}
