//! Lie symmetry analysis of quadratic homogeneous differential systems
//!
//! A quadratic homogeneous differential system (QHDS) is `ẋᵢ = Σⱼₖ aⁱⱼₖ xⱼ xₖ`.
//! This crate works on its first-order jet space with coordinates
//! `(t, x₁..xₙ, p₁..pₙ)`, where the system is the submanifold `pᵢ = Fᵢ(x)`.
//!
//! - [`algebra`]: exact rationals, canonical polynomials, symbolic expressions,
//!   probabilistic zero testing, fraction-free linear algebra.
//! - [`jet`]: the coefficient tensor, the right-hand side and the total derivative.
//! - [`fields`]: vector fields on the jet space, prolongation, Lie brackets and
//!   structure tables.
//! - [`determining`]: point symmetries from the determining equations under a
//!   polynomial ansatz.
//! - [`contact`]: contact generators and the example catalog.
//! - [`dynamics`]: flows (closed form and RK4), invariants and their verification.
//! - [`cli`]: the `qhds` command-line front end and its JSON reports.

pub mod algebra;
pub mod cli;
pub mod contact;
pub mod determining;
pub mod dynamics;
pub mod fields;
pub mod jet;
pub mod par;
pub mod report;
pub mod sample;

pub use algebra::{Expr, Poly, Rational, Var, ZeroTest};
pub use contact::{ContactSpec, ExampleId};
pub use fields::{FieldKind, VectorField};
pub use jet::{CoeffTensor, JetPoint, SystemRhs};
