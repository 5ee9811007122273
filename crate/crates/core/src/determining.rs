//! Determining equations for point symmetries under a polynomial ansatz.
//!
//! Each unknown is the coefficient of one monomial in `(t, x)` inside `T` or
//! one of the `Kᵢ`. The symmetry residual is linear in the unknowns, so the
//! residual of every single-unknown field is computed (in parallel) and the
//! coefficients of each residual monomial become one homogeneous row.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::linsolve;
use crate::algebra::{Expr, Monomial, Rational, Var};
use crate::fields::{FieldError, FieldKind, VectorField};
use crate::jet::{on_shell_substitute, SystemRhs};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `t, x, p` treated as jointly free in the symmetry condition.
    Strict,
    /// `pᵢ = Fᵢ(x)` substituted before splitting.
    OnShell,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::OnShell => "on-shell",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Mode::Strict),
            "on-shell" | "onshell" | "on_shell" => Ok(Mode::OnShell),
            _ => Err(format!("unknown mode {s:?} (expected strict or on-shell)")),
        }
    }
}

/// Which coefficient function an unknown belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoeffFn {
    T,
    /// `Kᵢ`, 1-based.
    K(usize),
}

impl fmt::Display for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffFn::T => write!(f, "T"),
            CoeffFn::K(i) => write!(f, "K{i}"),
        }
    }
}

/// Generic polynomial `T, K₁..Kₙ` of total degree ≤ `degree` in `(t, x)`.
///
/// Unknowns are ordered function-major (`T`, then `K₁`, …) and, inside each
/// function, by monomial: degree ascending, then exponent tuple
/// `(e_t, e_x1, …)` descending, so `1, t, x₁, …, t², t x₁, …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ansatz {
    n: usize,
    degree: u32,
    monomials: Vec<Monomial>,
}

impl Ansatz {
    pub fn new(n: usize, degree: u32) -> Self {
        let mut exps: Vec<Vec<u32>> = Vec::new();
        fn rec(pos: usize, len: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if pos == len {
                out.push(cur.clone());
                return;
            }
            for e in 0..=left {
                cur.push(e);
                rec(pos + 1, len, left - e, cur, out);
                cur.pop();
            }
        }
        rec(0, n + 1, degree, &mut Vec::new(), &mut exps);
        exps.sort_by(|a, b| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        let vars: Vec<Var> = std::iter::once(Var::T).chain((1..=n).map(Var::X)).collect();
        let monomials = exps.into_iter().map(|e| Monomial::from_pairs(vars.iter().copied().zip(e))).collect();
        Ansatz { n, degree, monomials }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn unknown_count(&self) -> usize {
        (self.n + 1) * self.monomials.len()
    }

    pub fn unknown(&self, idx: usize) -> (CoeffFn, &Monomial) {
        let per = self.monomials.len();
        let f = match idx / per {
            0 => CoeffFn::T,
            i => CoeffFn::K(i),
        };
        (f, &self.monomials[idx % per])
    }

    pub fn unknown_name(&self, idx: usize) -> String {
        let (f, m) = self.unknown(idx);
        format!("{f}[{m}]")
    }

    /// The point field with the given ansatz coefficients.
    pub fn field(&self, coeffs: &[Rational]) -> VectorField {
        assert_eq!(coeffs.len(), self.unknown_count(), "coefficient vector length");
        let per = self.monomials.len();
        let build = |block: usize| {
            Expr::sum(
                self.monomials.iter().zip(&coeffs[block * per..(block + 1) * per]).filter(|(_, c)| !c.is_zero()).map(
                    |(m, c)| {
                        Expr::product(
                            std::iter::once(Expr::Const(c.clone()))
                                .chain(m.factors().iter().map(|&(v, e)| Expr::pow(Expr::Var(v), e as i32))),
                        )
                    },
                ),
            )
        };
        VectorField::point(self.n, build(0), (1..=self.n).map(build).collect()).expect("ansatz fields are point fields")
    }

    fn unit_field(&self, idx: usize) -> VectorField {
        let mut e = vec![Rational::zero(); self.unknown_count()];
        e[idx] = Rational::from_integer(1.into());
        self.field(&e)
    }
}

/// `apply(prolong(v), pᵢ − Fᵢ)` for each `i`; in on-shell mode with `pᵢ = Fᵢ`
/// substituted afterwards.
pub fn symmetry_residual(sys: &SystemRhs, v: &VectorField, mode: Mode) -> Result<Vec<Expr>, FieldError> {
    if v.kind() != FieldKind::Point {
        return Err(FieldError::NotPoint);
    }
    if v.dim() != sys.dim() {
        return Err(FieldError::DimensionMismatch(v.dim(), sys.dim()));
    }
    let pr = v.prolong()?;
    Ok((1..=sys.dim())
        .map(|i| {
            let r = pr.apply(&(Expr::p(i) - sys.f_expr(i)));
            match mode {
                Mode::Strict => r,
                Mode::OnShell => on_shell_substitute(&r, sys),
            }
        })
        .collect())
}

/// One homogeneous equation: the coefficient of `monomial` in residual `equation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    /// 1-based equation index `i`.
    pub equation: usize,
    pub monomial: Monomial,
    pub coeffs: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct DeterminingSystem {
    pub ansatz: Ansatz,
    pub mode: Mode,
    /// Sorted by `(equation, monomial)`.
    pub rows: Vec<Row>,
}

impl DeterminingSystem {
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        self.rows.iter().map(|r| r.coeffs.clone()).collect()
    }

    pub fn rank(&self) -> usize {
        linsolve::rank(&self.matrix(), self.ansatz.unknown_count())
    }
}

pub fn determining_equations(sys: &SystemRhs, ansatz: &Ansatz, mode: Mode) -> DeterminingSystem {
    assert_eq!(sys.dim(), ansatz.dim(), "ansatz dimension");
    let n = sys.dim();
    let m = ansatz.unknown_count();
    let residuals: Vec<Vec<crate::algebra::Poly>> = par::map_range(m, |idx| {
        symmetry_residual(sys, &ansatz.unit_field(idx), mode)
            .expect("ansatz fields are point fields")
            .iter()
            .map(|r| r.to_poly(n).expect("polynomial residual"))
            .collect()
    });
    let mut table: BTreeMap<(usize, Monomial), Vec<Rational>> = BTreeMap::new();
    for (idx, per_eq) in residuals.iter().enumerate() {
        for (i, poly) in per_eq.iter().enumerate() {
            for (mono, c) in poly.terms() {
                table.entry((i + 1, mono.clone())).or_insert_with(|| vec![Rational::zero(); m])[idx] = c.clone();
            }
        }
    }
    let rows = table.into_iter().map(|((equation, monomial), coeffs)| Row { equation, monomial, coeffs }).collect();
    DeterminingSystem { ansatz: ansatz.clone(), mode, rows }
}

/// Point-symmetry basis at a fixed ansatz degree.
#[derive(Debug, Clone)]
pub struct SymmetryBasis {
    pub fields: Vec<VectorField>,
    pub mode: Mode,
    pub ansatz: Ansatz,
    coeffs: Vec<Vec<Rational>>,
}

impl SymmetryBasis {
    /// Ansatz coefficient vectors in reduced row-echelon form.
    pub fn coefficient_vectors(&self) -> &[Vec<Rational>] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    /// Named nonzero ansatz coefficients of basis vector `b`.
    pub fn coefficient_map(&self, b: usize) -> BTreeMap<String, Rational> {
        self.coeffs[b]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.ansatz.unknown_name(i), c.clone()))
            .collect()
    }
}

/// Exact null space of the determining system, normalized to reduced
/// row-echelon form (leading ansatz coefficient 1) and re-verified.
pub fn solve_point_symmetries(sys: &SystemRhs, degree: u32, mode: Mode) -> SymmetryBasis {
    let ansatz = Ansatz::new(sys.dim(), degree);
    let det = determining_equations(sys, &ansatz, mode);
    let m = ansatz.unknown_count();
    let null = linsolve::nullspace(&det.matrix(), m);
    let coeffs = linsolve::canonical_basis(&null, m);
    let fields: Vec<VectorField> = coeffs.iter().map(|c| ansatz.field(c)).collect();
    for f in &fields {
        let res = symmetry_residual(sys, f, mode).expect("point field");
        assert!(
            res.iter().all(|r| r.to_poly(sys.dim()).is_some_and(|p| p.is_zero())),
            "basis field {f} fails its own residual"
        );
    }
    SymmetryBasis { fields, mode, ansatz, coeffs }
}

/// Result of looking up first integrals of a point basis.
#[derive(Debug, Clone, PartialEq)]
pub enum PointInvariants {
    Invariants(Vec<Expr>),
    /// Only the time-translation case `{c ∂t}` is handled.
    Unsupported,
}

/// For the basis `{c ∂t}` the characteristic system `dt/c = dxᵢ/0` has the
/// first integrals `x₁, …, xₙ`.
pub fn invariants_of_point_basis(basis: &SymmetryBasis) -> PointInvariants {
    let n = basis.ansatz.dim();
    match basis.fields.as_slice() {
        [v] if v.t_coeff().as_const().is_some_and(|c| !c.is_zero())
            && (1..=n).all(|i| v.k_coeff(i).is_const_zero()) =>
        {
            PointInvariants::Invariants((1..=n).map(Expr::x).collect())
        }
        _ => PointInvariants::Unsupported,
    }
}
