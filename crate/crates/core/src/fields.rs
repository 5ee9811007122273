//! Vector fields on the first jet space, prolongation, Lie brackets and
//! commutator tables.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::linsolve;
use crate::algebra::{is_zero, Expr, Poly, Rational, Var, ZeroTest, ZeroTestConfig, SAMPLE_HI, SAMPLE_LO};
use crate::jet::{total_derivative, JetError};
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("operation requires a point field")]
    NotPoint,
    #[error("point field coefficient depends on {0}")]
    PointDependsOnDerivative(Var),
    #[error("coefficient mentions {var}, outside the jet space of dimension {n}")]
    VariableOutOfRange { var: Var, n: usize },
    #[error("expected {expected} coefficients, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// `T ∂t + Σ Kᵢ ∂xᵢ` with `T, K` functions of `(t, x)`.
    Point,
    /// First prolongation of a point field.
    Prolonged,
    /// General field on the jet space.
    Contact,
}

/// `T ∂t + Σ Kᵢ ∂xᵢ + Σ Pⱼ ∂pⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    n: usize,
    t: Expr,
    k: Vec<Expr>,
    p: Vec<Expr>,
    kind: FieldKind,
}

fn check_vars(n: usize, e: &Expr) -> Result<(), FieldError> {
    for var in e.free_vars() {
        if var == Var::S || !var.in_dimension(n) {
            return Err(FieldError::VariableOutOfRange { var, n });
        }
    }
    Ok(())
}

impl VectorField {
    pub fn point(n: usize, t: Expr, k: Vec<Expr>) -> Result<Self, FieldError> {
        if k.len() != n {
            return Err(FieldError::WrongLength { expected: n, got: k.len() });
        }
        for e in std::iter::once(&t).chain(&k) {
            check_vars(n, e)?;
            if let Some(v) = e.free_vars().into_iter().find(|v| v.is_derivative()) {
                return Err(FieldError::PointDependsOnDerivative(v));
            }
        }
        Ok(VectorField {
            n,
            t: t.normalize(),
            k: k.iter().map(Expr::normalize).collect(),
            p: vec![Expr::zero(); n],
            kind: FieldKind::Point,
        })
    }

    pub fn contact(n: usize, t: Expr, k: Vec<Expr>, p: Vec<Expr>) -> Result<Self, FieldError> {
        for v in [&k, &p] {
            if v.len() != n {
                return Err(FieldError::WrongLength { expected: n, got: v.len() });
            }
        }
        for e in std::iter::once(&t).chain(&k).chain(&p) {
            check_vars(n, e)?;
        }
        Ok(VectorField {
            n,
            t: t.normalize(),
            k: k.iter().map(Expr::normalize).collect(),
            p: p.iter().map(Expr::normalize).collect(),
            kind: FieldKind::Contact,
        })
    }

    pub fn zero(n: usize) -> Self {
        VectorField { n, t: Expr::zero(), k: vec![Expr::zero(); n], p: vec![Expr::zero(); n], kind: FieldKind::Point }
    }

    /// `∂t` as a point field.
    pub fn d_t(n: usize) -> Self {
        VectorField { t: Expr::one(), ..Self::zero(n) }
    }

    /// `∂xᵢ` as a point field.
    pub fn d_x(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.k[i - 1] = Expr::one();
        v
    }

    /// Same coefficients, different kind tag. Fails if a `Point` tag would
    /// violate its invariant.
    pub fn with_kind(mut self, kind: FieldKind) -> Result<Self, FieldError> {
        if kind == FieldKind::Point {
            if self.p.iter().any(|e| !e.is_const_zero()) {
                return Err(FieldError::NotPoint);
            }
            for e in std::iter::once(&self.t).chain(&self.k) {
                if let Some(v) = e.free_vars().into_iter().find(|v| v.is_derivative()) {
                    return Err(FieldError::PointDependsOnDerivative(v));
                }
            }
        }
        self.kind = kind;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn t_coeff(&self) -> &Expr {
        &self.t
    }

    /// `Kᵢ`, 1-based.
    pub fn k_coeff(&self, i: usize) -> &Expr {
        &self.k[i - 1]
    }

    /// `Pⱼ`, 1-based.
    pub fn p_coeff(&self, j: usize) -> &Expr {
        &self.p[j - 1]
    }

    pub fn component(&self, v: Var) -> &Expr {
        match v {
            Var::T => &self.t,
            Var::X(i) => &self.k[i - 1],
            Var::P(j) => &self.p[j - 1],
            Var::S => panic!("the flow parameter is not a jet coordinate"),
        }
    }

    /// `(coordinate, coefficient)` in the order `t, x₁..xₙ, p₁..pₙ`.
    pub fn components(&self) -> impl Iterator<Item = (Var, &Expr)> {
        Var::jet_coords(self.n).into_iter().map(move |v| (v, self.component(v)))
    }

    fn map_components(&self, kind: FieldKind, f: impl Fn(Var, &Expr) -> Expr) -> VectorField {
        let n = self.n;
        VectorField {
            n,
            t: f(Var::T, &self.t),
            k: (1..=n).map(|i| f(Var::X(i), &self.k[i - 1])).collect(),
            p: (1..=n).map(|j| f(Var::P(j), &self.p[j - 1])).collect(),
            kind,
        }
    }

    /// `v[e] = T ∂e/∂t + Σ Kᵢ ∂e/∂xᵢ + Σ Pⱼ ∂e/∂pⱼ`.
    pub fn apply(&self, e: &Expr) -> Expr {
        let free = e.free_vars();
        Expr::sum(
            self.components()
                .filter(|(v, c)| free.contains(v) && !c.is_const_zero())
                .map(|(v, c)| c * &e.differentiate(v)),
        )
        .normalize()
    }

    /// First prolongation, `Pᵢ = D_t(Kᵢ) − pᵢ D_t(T)`.
    pub fn prolong(&self) -> Result<VectorField, FieldError> {
        if self.kind != FieldKind::Point {
            return Err(FieldError::NotPoint);
        }
        let dt_t = total_derivative(&self.t)?;
        let mut p = Vec::with_capacity(self.n);
        for i in 1..=self.n {
            let dk = total_derivative(&self.k[i - 1])?;
            p.push((dk - Expr::p(i) * dt_t.clone()).normalize());
        }
        Ok(VectorField { n: self.n, t: self.t.clone(), k: self.k.clone(), p, kind: FieldKind::Prolonged })
    }

    /// Componentwise linear combination `a·self + b·other`, tagged `Contact`
    /// unless both inputs share a kind.
    pub fn combine(&self, a: &Rational, other: &VectorField, b: &Rational) -> Result<VectorField, FieldError> {
        if self.n != other.n {
            return Err(FieldError::DimensionMismatch(self.n, other.n));
        }
        let kind = if self.kind == other.kind { self.kind } else { FieldKind::Contact };
        Ok(self.map_components(kind, |v, c| (c.scale(a) + other.component(v).scale(b)).normalize()))
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, FieldError> {
        self.combine(&Rational::one(), other, &Rational::one())
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField, FieldError> {
        self.combine(&Rational::one(), other, &-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> VectorField {
        self.map_components(self.kind, |_, e| e.scale(c).normalize())
    }

    /// Canonical polynomial coefficients, if every coefficient is polynomial.
    pub fn to_polys(&self) -> Option<Vec<Poly>> {
        self.components().map(|(_, c)| c.to_poly(self.n)).collect()
    }

    pub fn is_polynomial(&self) -> bool {
        self.components().all(|(_, c)| c.is_polynomial())
    }

    /// True when every coefficient has an empty canonical polynomial form.
    pub fn is_exact_zero(&self) -> bool {
        self.to_polys().is_some_and(|ps| ps.iter().all(Poly::is_zero))
    }

    /// Per-component zero test, in `components()` order.
    pub fn zero_test(&self, cfg: &ZeroTestConfig) -> Vec<(Var, ZeroTest)> {
        self.components().map(|(v, c)| (v, is_zero(c, cfg))).collect()
    }

    /// Exact equality for polynomial fields, probabilistic otherwise.
    pub fn equivalent(&self, other: &VectorField, cfg: &ZeroTestConfig) -> bool {
        match self.sub(other) {
            Ok(d) => d.zero_test(cfg).iter().all(|(_, z)| z.is_zero()),
            Err(_) => false,
        }
    }

    /// Evaluates every coefficient at `env`, in `components()` order.
    pub fn eval(&self, env: &dyn crate::algebra::Bindings) -> Result<Vec<f64>, crate::algebra::EvalError> {
        self.components().map(|(_, c)| c.evaluate(env)).collect()
    }
}

/// `[v, w]`, component `c` being `v[w_c] − w[v_c]` over all `2n + 1` coordinates.
pub fn lie_bracket(v: &VectorField, w: &VectorField) -> Result<VectorField, FieldError> {
    if v.n != w.n {
        return Err(FieldError::DimensionMismatch(v.n, w.n));
    }
    Ok(v.map_components(FieldKind::Contact, |c, vc| (v.apply(w.component(c)) - w.apply(vc)).normalize()))
}

/// `v[e]`; free-function form of [`VectorField::apply`].
pub fn apply(v: &VectorField, e: &Expr) -> Expr {
    v.apply(e)
}

/// First prolongation; free-function form of [`VectorField::prolong`].
pub fn prolong(v: &VectorField) -> Result<VectorField, FieldError> {
    v.prolong()
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in self.components() {
            if c.is_const_zero() {
                continue;
            }
            let mut body = c.to_string();
            let mut neg = false;
            if let Some(rest) = body.strip_prefix('-') {
                if !matches!(c, Expr::Add(_)) {
                    neg = true;
                    body = rest.to_string();
                }
            }
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match c {
                _ if body == "1" => write!(f, "∂{v}")?,
                Expr::Add(_) => write!(f, "({body})∂{v}")?,
                _ => write!(f, "{body}∂{v}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Entry of a commutator table.
#[derive(Debug, Clone, PartialEq)]
pub enum TableEntry {
    /// `[gᵢ, gⱼ] = Σₖ cₖ gₖ` with constant rational `cₖ`. `exact` is false when
    /// the match was decided by probabilistic zero testing.
    Expansion { coeffs: Vec<Rational>, exact: bool },
    /// No constant-coefficient expansion; the bracket itself is attached.
    NotInSpan { residual: VectorField },
}

impl TableEntry {
    pub fn coeffs(&self) -> Option<&[Rational]> {
        match self {
            TableEntry::Expansion { coeffs, .. } => Some(coeffs),
            TableEntry::NotInSpan { .. } => None,
        }
    }
}

/// Pairwise brackets of a generator list.
#[derive(Debug, Clone)]
pub struct StructureTable {
    pub generators: Vec<VectorField>,
    /// `entries[i][j]` describes `[gᵢ, gⱼ]` (0-based).
    pub entries: Vec<Vec<TableEntry>>,
    pub brackets: Vec<Vec<VectorField>>,
}

/// Computes `[gᵢ, gⱼ]` for `i < j` (in parallel), mirrors the lower triangle by
/// antisymmetry and tries to expand each bracket over the generators.
pub fn structure_table(gens: &[VectorField], cfg: &ZeroTestConfig) -> Result<StructureTable, FieldError> {
    let m = gens.len();
    let n = gens.first().map_or(0, VectorField::dim);
    if let Some(g) = gens.iter().find(|g| g.dim() != n) {
        return Err(FieldError::DimensionMismatch(n, g.dim()));
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let computed: Vec<(VectorField, TableEntry)> = par::map(&pairs, |&(i, j)| {
        let br = lie_bracket(&gens[i], &gens[j]).expect("dimensions checked");
        let entry = expand_in_span(&br, gens, cfg);
        (br, entry)
    });
    let zero_entry = TableEntry::Expansion { coeffs: vec![Rational::zero(); m], exact: true };
    let mut entries = vec![vec![zero_entry; m]; m];
    let mut brackets = vec![vec![VectorField::zero(n).with_kind(FieldKind::Contact)?; m]; m];
    for (&(i, j), (br, entry)) in pairs.iter().zip(computed) {
        entries[j][i] = match &entry {
            TableEntry::Expansion { coeffs, exact } => {
                TableEntry::Expansion { coeffs: coeffs.iter().map(|c| -c).collect(), exact: *exact }
            }
            TableEntry::NotInSpan { residual } => TableEntry::NotInSpan { residual: residual.scale(&-Rational::one()) },
        };
        entries[i][j] = entry;
        brackets[j][i] = br.scale(&-Rational::one());
        brackets[i][j] = br;
    }
    Ok(StructureTable { generators: gens.to_vec(), entries, brackets })
}

/// Finds constant `c` with `target = Σ cₖ gens[k]`.
///
/// Polynomial inputs are matched coefficient by coefficient and solved exactly.
/// Otherwise a least-squares fit at sampled points proposes `c`, which is
/// rounded to nearby rationals and then confirmed with [`is_zero`].
pub fn expand_in_span(target: &VectorField, gens: &[VectorField], cfg: &ZeroTestConfig) -> TableEntry {
    let m = gens.len();
    if target.is_exact_zero() {
        return TableEntry::Expansion { coeffs: vec![Rational::zero(); m], exact: true };
    }
    if let (Some(tp), Some(gp)) =
        (target.to_polys(), gens.iter().map(VectorField::to_polys).collect::<Option<Vec<_>>>())
    {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (comp, target_poly) in tp.iter().enumerate() {
            let mut monos: Vec<_> = target_poly.terms().map(|(mono, _)| mono.clone()).collect();
            for g in &gp {
                monos.extend(g[comp].terms().map(|(mono, _)| mono.clone()));
            }
            monos.sort();
            monos.dedup();
            for mono in monos {
                rows.push(gp.iter().map(|g| g[comp].coeff(&mono)).collect::<Vec<_>>());
                rhs.push(target_poly.coeff(&mono));
            }
        }
        return match linsolve::solve(&rows, &rhs, m) {
            Some(coeffs) => TableEntry::Expansion { coeffs, exact: true },
            None => TableEntry::NotInSpan { residual: target.clone() },
        };
    }
    match numeric_expansion(target, gens, cfg) {
        Some(coeffs) => TableEntry::Expansion { coeffs, exact: false },
        None => TableEntry::NotInSpan { residual: target.clone() },
    }
}

fn numeric_expansion(target: &VectorField, gens: &[VectorField], cfg: &ZeroTestConfig) -> Option<Vec<Rational>> {
    let m = gens.len();
    let n = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let want_points = (2 * m + 4).max(cfg.trials);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut attempts = 0;
    let mut points = 0;
    while points < want_points && attempts < 10 * want_points {
        attempts += 1;
        let coords: Vec<(Var, f64)> =
            Var::jet_coords(n).into_iter().map(|v| (v, rng.random_range(SAMPLE_LO..=SAMPLE_HI))).collect();
        let Ok(tv) = target.eval(&coords) else { continue };
        let Ok(gv) = gens.iter().map(|g| g.eval(&coords)).collect::<Result<Vec<_>, _>>() else {
            continue;
        };
        points += 1;
        for c in 0..tv.len() {
            rows.push(gv.iter().map(|g| g[c]).collect());
            rhs.push(tv[c]);
        }
    }
    if points == 0 {
        return None;
    }
    let a = DMatrix::from_fn(rows.len(), m, |r, c| rows[r][c]);
    let b = DVector::from_vec(rhs);
    let sol = a.svd(true, true).solve(&b, 1e-12).ok()?;
    let coeffs: Vec<Rational> = sol.iter().map(|&x| approximate_rational(x, 10_000)).collect();
    let mut combo = VectorField::zero(n).with_kind(FieldKind::Contact).ok()?;
    for (g, c) in gens.iter().zip(&coeffs) {
        combo = combo.combine(&Rational::one(), g, c).ok()?;
    }
    target.equivalent(&combo, cfg).then_some(coeffs)
}

/// Best rational approximation with denominator at most `max_den`
/// (continued-fraction convergents).
pub fn approximate_rational(x: f64, max_den: i64) -> Rational {
    use num_bigint::BigInt;
    if !x.is_finite() {
        return Rational::zero();
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return Rational::zero();
    }
    Rational::new(BigInt::from(h1), BigInt::from(k1))
}
