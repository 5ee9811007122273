//! Symbolic expressions over jet coordinates.
//!
//! There is no general simplifier. Constructors fold constants and flatten
//! nested sums and products, and [`Expr::normalize`] collapses polynomial
//! sub-trees to their canonical [`Poly`] form. Equality of arbitrary
//! expressions is decided by [`super::is_zero`] on the difference.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::poly::Poly;
use super::rational::{rat, to_f64, Rational};
use super::var::Var;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    Var(Var),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    /// Integer power; negative exponents encode division.
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(Var),
    #[error("ln of non-positive argument {0}")]
    LnDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite intermediate value")]
    NonFinite,
}

/// Source of numeric values for variables during evaluation.
pub trait Bindings {
    fn value(&self, v: Var) -> Option<f64>;
}

impl Bindings for BTreeMap<Var, f64> {
    fn value(&self, v: Var) -> Option<f64> {
        self.get(&v).copied()
    }
}

impl Bindings for HashMap<Var, f64> {
    fn value(&self, v: Var) -> Option<f64> {
        self.get(&v).copied()
    }
}

impl Bindings for Vec<(Var, f64)> {
    fn value(&self, v: Var) -> Option<f64> {
        self.iter().find(|(w, _)| *w == v).map(|&(_, x)| x)
    }
}

/// Adapts a closure to [`Bindings`].
pub struct FnBindings<F>(pub F);

impl<F: Fn(Var) -> Option<f64>> Bindings for FnBindings<F> {
    fn value(&self, v: Var) -> Option<f64> {
        (self.0)(v)
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::Var(v)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::Const(c)
    }
}

impl From<i64> for Expr {
    fn from(c: i64) -> Self {
        Expr::Const(rat(c))
    }
}

impl From<&Poly> for Expr {
    fn from(p: &Poly) -> Self {
        Expr::from_poly(p)
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    pub fn int(c: i64) -> Expr {
        Expr::Const(rat(c))
    }

    pub fn t() -> Expr {
        Expr::Var(Var::T)
    }

    pub fn x(i: usize) -> Expr {
        Expr::Var(Var::X(i))
    }

    pub fn p(i: usize) -> Expr {
        Expr::Var(Var::P(i))
    }

    pub fn s() -> Expr {
        Expr::Var(Var::S)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Syntactic zero test; see [`super::is_zero`] for the semantic one.
    pub fn is_const_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut c = Rational::zero();
        let mut out = Vec::new();
        fn push(e: Expr, c: &mut Rational, out: &mut Vec<Expr>) {
            match e {
                Expr::Const(k) => *c += k,
                Expr::Add(ts) => {
                    for t in ts {
                        push(t, c, out);
                    }
                }
                other => out.push(other),
            }
        }
        for t in terms {
            push(t, &mut c, &mut out);
        }
        if !c.is_zero() {
            out.insert(0, Expr::Const(c));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }

    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut c = Rational::one();
        let mut out = Vec::new();
        fn push(e: Expr, c: &mut Rational, out: &mut Vec<Expr>) {
            match e {
                Expr::Const(k) => *c *= k,
                Expr::Mul(fs) => {
                    for f in fs {
                        push(f, c, out);
                    }
                }
                other => out.push(other),
            }
        }
        for f in factors {
            push(f, &mut c, &mut out);
        }
        if c.is_zero() {
            return Expr::zero();
        }
        if !c.is_one() {
            out.insert(0, Expr::Const(c));
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::Mul(out),
        }
    }

    pub fn pow(base: Expr, k: i32) -> Expr {
        match (base, k) {
            (_, 0) => Expr::one(),
            (b, 1) => b,
            (Expr::Const(c), k) if !(c.is_zero() && k < 0) => {
                let mut acc = Rational::one();
                for _ in 0..k.unsigned_abs() {
                    acc *= &c;
                }
                Expr::Const(if k < 0 { acc.recip() } else { acc })
            }
            (Expr::Pow(b, j), k) => Expr::pow(*b, j * k),
            (b, k) => Expr::Pow(Box::new(b), k),
        }
    }

    pub fn exp(arg: Expr) -> Expr {
        match arg {
            Expr::Const(c) if c.is_zero() => Expr::one(),
            a => Expr::Exp(Box::new(a)),
        }
    }

    pub fn ln(arg: Expr) -> Expr {
        match arg {
            Expr::Const(c) if c.is_one() => Expr::zero(),
            Expr::Exp(a) => *a,
            a => Expr::Ln(Box::new(a)),
        }
    }

    pub fn recip(e: Expr) -> Expr {
        Expr::pow(e, -1)
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        Expr::product([Expr::Const(c.clone()), self.clone()])
    }

    pub fn from_poly(p: &Poly) -> Expr {
        Expr::sum(p.terms().map(|(m, c)| {
            Expr::product(
                std::iter::once(Expr::Const(c.clone()))
                    .chain(m.factors().iter().map(|&(v, e)| Expr::pow(Expr::Var(v), e as i32))),
            )
        }))
    }

    /// Canonical polynomial form, when the expression is a polynomial.
    pub fn to_poly(&self, n: usize) -> Option<Poly> {
        Some(match self {
            Expr::Const(c) => Poly::constant(n, c.clone()),
            Expr::Var(v) => Poly::var(n, *v),
            Expr::Add(ts) => {
                let mut acc = Poly::zero(n);
                for t in ts {
                    acc = acc + t.to_poly(n)?;
                }
                acc
            }
            Expr::Mul(fs) => {
                let mut acc = Poly::one(n);
                for f in fs {
                    acc = acc * f.to_poly(n)?;
                }
                acc
            }
            Expr::Pow(b, k) if *k >= 0 => b.to_poly(n)?.pow(*k as u32),
            Expr::Pow(..) | Expr::Exp(_) | Expr::Ln(_) => return None,
        })
    }

    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Add(ts) | Expr::Mul(ts) => ts.iter().all(Expr::is_polynomial),
            Expr::Pow(b, k) => *k >= 0 && b.is_polynomial(),
            Expr::Exp(_) | Expr::Ln(_) => false,
        }
    }

    /// Largest `xᵢ`/`pᵢ` index occurring (0 if none).
    pub fn max_index(&self) -> usize {
        self.free_vars().into_iter().filter_map(Var::index).max().unwrap_or(0)
    }

    /// Collapses every maximal polynomial sub-tree to canonical form.
    pub fn normalize(&self) -> Expr {
        let n = self.max_index();
        self.normalize_in(n)
    }

    fn normalize_in(&self, n: usize) -> Expr {
        if self.is_polynomial() {
            return Expr::from_poly(&self.to_poly(n).expect("checked polynomial"));
        }
        match self {
            Expr::Add(ts) => {
                let mut poly = Poly::zero(n);
                let mut rest = Vec::new();
                // Like terms: same non-polynomial factors up to order. A
                // coefficient times a nested sum is distributed.
                let mut groups: Vec<(Vec<String>, Vec<Expr>, Poly)> = Vec::new();
                let mut work: Vec<(Poly, Expr)> = ts.iter().rev().map(|t| (Poly::one(n), t.clone())).collect();
                while let Some((scale, t)) = work.pop() {
                    if t.is_polynomial() {
                        poly = poly + &scale * &t.to_poly(n).expect("checked polynomial");
                        continue;
                    }
                    let t = t.normalize_in(n);
                    let factors = match &t {
                        Expr::Mul(fs) => fs.clone(),
                        other => vec![other.clone()],
                    };
                    let (coef, key): (Vec<Expr>, Vec<Expr>) = factors.into_iter().partition(Expr::is_polynomial);
                    let coef = coef.iter().fold(scale, |acc, f| acc * f.to_poly(n).expect("checked polynomial"));
                    if let [Expr::Add(inner)] = key.as_slice() {
                        work.extend(inner.iter().rev().map(|u| (coef.clone(), u.clone())));
                        continue;
                    }
                    let mut id: Vec<String> = key.iter().map(ToString::to_string).collect();
                    id.sort();
                    match groups.iter_mut().find(|(g, _, _)| *g == id) {
                        Some((_, _, c)) => *c = &*c + &coef,
                        None => groups.push((id, key, coef)),
                    }
                }
                for (_, key, coef) in groups {
                    if !coef.is_zero() {
                        rest.push(Expr::product(std::iter::once(Expr::from_poly(&coef)).chain(key)));
                    }
                }
                Expr::sum(std::iter::once(Expr::from_poly(&poly)).chain(rest))
            }
            Expr::Mul(fs) => {
                let mut poly = Poly::one(n);
                let mut rest = Vec::new();
                for f in fs {
                    if f.is_polynomial() {
                        poly = poly * f.to_poly(n).expect("checked polynomial");
                    } else {
                        rest.push(f.normalize_in(n));
                    }
                }
                Expr::product(std::iter::once(Expr::from_poly(&poly)).chain(rest))
            }
            Expr::Pow(b, k) => Expr::pow(b.normalize_in(n), *k),
            Expr::Exp(a) => Expr::exp(a.normalize_in(n)),
            Expr::Ln(a) => Expr::ln(a.normalize_in(n)),
            Expr::Const(_) | Expr::Var(_) => self.clone(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Add(ts) | Expr::Mul(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Expr::Pow(b, _) => b.collect_vars(out),
            Expr::Exp(a) | Expr::Ln(a) => a.collect_vars(out),
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Add(ts) | Expr::Mul(ts) => ts.iter().any(|t| t.depends_on(v)),
            Expr::Pow(b, _) => b.depends_on(v),
            Expr::Exp(a) | Expr::Ln(a) => a.depends_on(v),
        }
    }

    /// Exact partial derivative `∂/∂v`.
    pub fn differentiate(&self, v: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(ts) => Expr::sum(ts.iter().map(|t| t.differentiate(v))),
            Expr::Mul(fs) => Expr::sum((0..fs.len()).filter_map(|i| {
                let d = fs[i].differentiate(v);
                if d.is_const_zero() {
                    return None;
                }
                Some(Expr::product(fs.iter().enumerate().map(|(j, f)| if i == j { d.clone() } else { f.clone() })))
            })),
            Expr::Pow(b, k) => {
                let db = b.differentiate(v);
                if db.is_const_zero() {
                    return Expr::zero();
                }
                Expr::product([Expr::int(*k as i64), Expr::pow((**b).clone(), k - 1), db])
            }
            Expr::Exp(a) => {
                let da = a.differentiate(v);
                if da.is_const_zero() {
                    return Expr::zero();
                }
                Expr::product([self.clone(), da])
            }
            Expr::Ln(a) => {
                let da = a.differentiate(v);
                if da.is_const_zero() {
                    return Expr::zero();
                }
                Expr::product([da, Expr::recip((**a).clone())])
            }
        }
    }

    /// Replaces each variable for which `f` returns `Some`.
    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => f(*v).unwrap_or_else(|| self.clone()),
            Expr::Add(ts) => Expr::sum(ts.iter().map(|t| t.substitute(f))),
            Expr::Mul(fs) => Expr::product(fs.iter().map(|t| t.substitute(f))),
            Expr::Pow(b, k) => Expr::pow(b.substitute(f), *k),
            Expr::Exp(a) => Expr::exp(a.substitute(f)),
            Expr::Ln(a) => Expr::ln(a.substitute(f)),
        }
    }

    pub fn evaluate(&self, env: &dyn Bindings) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => to_f64(c),
            Expr::Var(v) => env.value(*v).ok_or(EvalError::Unbound(*v))?,
            Expr::Add(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.evaluate(env)?;
                }
                acc
            }
            Expr::Mul(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.evaluate(env)?;
                }
                acc
            }
            Expr::Pow(b, k) => {
                let x = b.evaluate(env)?;
                if *k < 0 && x == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                x.powi(*k)
            }
            Expr::Exp(a) => a.evaluate(env)?.exp(),
            Expr::Ln(a) => {
                let x = a.evaluate(env)?;
                if x <= 0.0 || x.is_nan() {
                    return Err(EvalError::LnDomain(x));
                }
                x.ln()
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Number of nodes; a rough size measure for tests and benches.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Add(ts) | Expr::Mul(ts) => ts.iter().map(Expr::size).sum(),
            Expr::Pow(b, _) => b.size(),
            Expr::Exp(a) | Expr::Ln(a) => a.size(),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum([self, -rhs])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::int(-1), self])
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), rhs.clone()])
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::product([self.clone(), rhs.clone()])
    }
}

// Display: precedence levels 0 = sum, 1 = product, 2 = power operand.
impl Expr {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                let needs_paren = (prec >= 2 && (c.is_negative() || !c.is_integer())) || (prec == 1 && c.is_negative());
                if needs_paren {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(ts) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                for (i, t) in ts.iter().enumerate() {
                    let (neg, body) = split_sign(t);
                    match (i, neg) {
                        (0, true) => write!(f, "-")?,
                        (0, false) => {}
                        (_, true) => write!(f, " - ")?,
                        (_, false) => write!(f, " + ")?,
                    }
                    body.fmt_prec(f, 1)?;
                }
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Mul(fs) => {
                if prec >= 2 {
                    write!(f, "(")?;
                }
                let (neg, body) = split_sign(self);
                if neg {
                    write!(f, "-")?;
                    body.fmt_prec(f, 1)?;
                } else {
                    for (i, x) in fs.iter().enumerate() {
                        if i > 0 {
                            write!(f, "*")?;
                        }
                        match x {
                            // a leading positive constant reads fine as `3/2*x1`
                            Expr::Const(c) if i == 0 && !c.is_negative() => write!(f, "{c}")?,
                            _ => x.fmt_prec(f, 2)?,
                        }
                    }
                }
                if prec >= 2 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Pow(b, k) => {
                b.fmt_prec(f, 2)?;
                write!(f, "^{k}")
            }
            Expr::Exp(a) => {
                write!(f, "exp(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")
            }
            Expr::Ln(a) => {
                write!(f, "ln(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

/// Splits a leading negative constant off a term, for `a - b` style output.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Const(c) if c.is_negative() => (true, Expr::Const(-c)),
        Expr::Mul(fs) => match fs.first() {
            Some(Expr::Const(c)) if c.is_negative() => {
                let rest = std::iter::once(Expr::Const(-c)).chain(fs[1..].iter().cloned());
                (true, Expr::product(rest))
            }
            _ => (false, e.clone()),
        },
        _ => (false, e.clone()),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::ratio;

    fn env(pairs: &[(Var, f64)]) -> BTreeMap<Var, f64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn derivative_of_square() {
        let e = Expr::pow(Expr::x(1), 2);
        let d = e.differentiate(Var::X(1)).normalize();
        assert_eq!(d, Expr::int(2) * Expr::x(1));
    }

    #[test]
    fn derivative_chain_rule() {
        let c = ratio(3, 2);
        let e = Expr::exp(Expr::x(1).scale(&c));
        let d = e.differentiate(Var::X(1));
        let expected = Expr::product([Expr::Const(c.clone()), e.clone()]);
        let diff = (d - expected).normalize();
        let at = env(&[(Var::X(1), 0.7)]);
        assert!(diff.evaluate(&at).unwrap().abs() < 1e-15);
    }

    #[test]
    fn derivative_product_rule() {
        // ∂/∂t (t(1 - c x1)) = 1 - c x1
        let c = rat(5);
        let e = Expr::t() * (Expr::one() - Expr::x(1).scale(&c));
        let d = e.differentiate(Var::T).to_poly(1).unwrap();
        let expected = (Expr::one() - Expr::x(1).scale(&c)).to_poly(1).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn evaluate_basic() {
        let e = Expr::pow(Expr::x(1), 2);
        assert_eq!(e.evaluate(&env(&[(Var::X(1), 3.0)])).unwrap(), 9.0);
        let l = Expr::ln(Expr::x(1));
        assert_eq!(l.evaluate(&env(&[(Var::X(1), 1.0)])).unwrap(), 0.0);
        assert!(matches!(l.evaluate(&env(&[(Var::X(1), -1.0)])), Err(EvalError::LnDomain(_))));
        assert_eq!(l.evaluate(&env(&[])), Err(EvalError::Unbound(Var::X(1))));
        let r = Expr::recip(Expr::x(1));
        assert_eq!(r.evaluate(&env(&[(Var::X(1), 0.0)])), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn constructors_fold() {
        assert_eq!(Expr::x(1) * Expr::zero(), Expr::zero());
        assert_eq!(Expr::x(1) * Expr::one(), Expr::x(1));
        assert_eq!(Expr::x(1) + Expr::zero(), Expr::x(1));
        assert_eq!(Expr::pow(Expr::int(2), -2), Expr::Const(ratio(1, 4)));
        assert_eq!(Expr::exp(Expr::zero()), Expr::one());
        assert_eq!(Expr::ln(Expr::exp(Expr::t())), Expr::t());
    }

    #[test]
    fn normalize_cancels_polynomial_parts() {
        let e = Expr::pow(Expr::x(1), 2) - Expr::x(1) * Expr::x(1);
        assert_eq!(e.normalize(), Expr::zero());
        let mixed = Expr::exp(Expr::x(1)) + Expr::x(1) - Expr::x(1);
        assert_eq!(mixed.normalize(), Expr::exp(Expr::x(1)));
    }

    #[test]
    fn display() {
        let e = Expr::t() - Expr::int(2) * Expr::x(1) * Expr::p(1);
        assert_eq!(e.to_string(), "t - 2*x1*p1");
        let f = Expr::exp(Expr::x(1).scale(&ratio(-1, 2))) * Expr::pow(Expr::x(2) + Expr::one(), -1);
        assert_eq!(f.to_string(), "exp(-1/2*x1)*(1 + x2)^-1");
    }
}
