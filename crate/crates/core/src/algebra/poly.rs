//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::expr::{Bindings, EvalError};
use super::rational::{rat, to_f64, Rational};
use super::var::Var;
use super::AlgebraError;

/// Power product of variables; exponents are positive and variables sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds a monomial from arbitrary `(var, exp)` pairs, merging repeats.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut m: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *m.entry(v).or_default() += e;
        }
        Monomial(m.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, ea) = self.0[i];
            let (b, eb) = other.0[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    out.push((a, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `∂/∂v`, as `(multiplier, monomial)`; `None` when `v` does not occur.
    pub fn derivative(&self, v: Var) -> Option<(u32, Monomial)> {
        let pos = self.0.iter().position(|&(w, _)| w == v)?;
        let e = self.0[pos].1;
        let mut m = self.0.clone();
        if e == 1 {
            m.remove(pos);
        } else {
            m[pos].1 = e - 1;
        }
        Some((e, Monomial(m)))
    }

    /// Splits off all factors matching `pred`: returns `(matching, rest)`.
    pub fn split(&self, pred: impl Fn(Var) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().partition(|&&(v, _)| pred(v));
        (Monomial(a), Monomial(b))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }

    pub fn eval_f64(&self, env: &dyn Bindings) -> Result<f64, EvalError> {
        let mut acc = 1.0;
        for &(v, e) in &self.0 {
            let x = env.value(v).ok_or(EvalError::Unbound(v))?;
            acc *= x.powi(e as i32);
        }
        Ok(acc)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Canonical sparse polynomial in ambient dimension `n`.
///
/// No zero coefficients are stored, so two polynomials are equal exactly when
/// their term maps are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

/// Checked ring operation; fails when the operands live in different dimensions.
pub fn poly_arith(a: &Poly, b: &Poly, op: PolyOp) -> Result<Poly, AlgebraError> {
    if a.n != b.n {
        return Err(AlgebraError::DimensionMismatch { left: a.n, right: b.n });
    }
    Ok(match op {
        PolyOp::Add => a.add_unchecked(b),
        PolyOp::Sub => a.add_unchecked(&b.neg()),
        PolyOp::Mul => a.mul_unchecked(b),
    })
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        Self::term(n, c, Monomial::one())
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rational::one())
    }

    pub fn var(n: usize, v: Var) -> Self {
        Self::term(n, Rational::one(), Monomial::var(v))
    }

    pub fn term(n: usize, c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { n, terms }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero(n);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// True when every term has total degree exactly `d` (the zero polynomial qualifies).
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == d)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v: Vec<Var> = self.terms.keys().flat_map(|m| m.vars()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn add_unchecked(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    fn mul_unchecked(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { n: self.n, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.n);
        }
        Poly { n: self.n, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.n);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            if let Some((e, dm)) = m.derivative(v) {
                out.add_term(dm, c * rat(e as i64));
            }
        }
        out
    }

    /// Replaces each variable `v` for which `f(v)` is `Some` by that polynomial.
    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<Poly>) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(self.n, c.clone());
            for &(v, e) in m.factors() {
                let factor = match f(v) {
                    Some(p) => p.pow(e),
                    None => Poly::term(self.n, Rational::one(), Monomial(vec![(v, e)])),
                };
                acc = acc.mul_unchecked(&factor);
            }
            out = out.add_unchecked(&acc);
        }
        out
    }

    /// Groups terms by the part of their monomial built from variables in
    /// `outer`; the remaining factors stay in the grouped coefficients.
    pub fn collect_by(&self, outer: impl Fn(Var) -> bool) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (key, rest) = m.split(&outer);
            out.entry(key).or_insert_with(|| Poly::zero(self.n)).add_term(rest, c.clone());
        }
        out
    }

    pub fn eval_f64(&self, env: &dyn Bindings) -> Result<f64, EvalError> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            acc += to_f64(c) * m.eval_f64(env)?;
        }
        Ok(acc)
    }

    pub fn eval_rational(&self, env: &dyn Fn(Var) -> Option<Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.factors() {
                let x = env(v)?;
                for _ in 0..e {
                    t *= &x;
                }
            }
            acc += t;
        }
        Some(acc)
    }

    /// Same polynomial viewed in another ambient dimension.
    pub fn with_dim(mut self, n: usize) -> Poly {
        self.n = n;
        self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl std::ops::$tr<&Poly> for &Poly {
            type Output = Poly;
            /// Panics on a dimension mismatch; use [`poly_arith`] for a checked variant.
            fn $method(self, rhs: &Poly) -> Poly {
                poly_arith(self, rhs, $op).expect("polynomial dimension mismatch")
            }
        }
        impl std::ops::$tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                std::ops::$tr::$method(&self, &rhs)
            }
        }
    };
}

poly_binop!(Add, add, PolyOp::Add);
poly_binop!(Sub, sub, PolyOp::Sub);
poly_binop!(Mul, mul, PolyOp::Mul);

impl std::ops::Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::ratio;

    fn x(i: usize) -> Poly {
        Poly::var(2, Var::X(i))
    }

    #[test]
    fn difference_of_squares() {
        let one = Poly::one(2);
        let p = (&x(1) + &one) * (&x(1) - &one);
        let expected = &x(1).pow(2) - &one;
        assert_eq!(p, expected);
        assert_eq!(p.to_string(), "-1 + x1^2");
    }

    #[test]
    fn annihilator() {
        let p = &x(1) + &x(2);
        let z = &p * &Poly::zero(2);
        assert!(z.is_zero());
        assert_eq!(z.len(), 0);
    }

    #[test]
    fn binomial_square() {
        let s = &x(1) + &x(2);
        let sq = &s * &s;
        let expected = Poly::from_terms(
            2,
            [
                (Monomial::from_pairs([(Var::X(1), 2)]), rat(1)),
                (Monomial::from_pairs([(Var::X(1), 1), (Var::X(2), 1)]), rat(2)),
                (Monomial::from_pairs([(Var::X(2), 2)]), rat(1)),
            ],
        );
        assert_eq!(sq, expected);
        assert_eq!(s.pow(2), expected);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Poly::var(1, Var::X(1));
        let b = Poly::var(2, Var::X(1));
        assert_eq!(poly_arith(&a, &b, PolyOp::Add), Err(AlgebraError::DimensionMismatch { left: 1, right: 2 }));
    }

    #[test]
    fn derivative_and_collect() {
        let n = 1;
        let t = Poly::var(n, Var::T);
        let x1 = Poly::var(n, Var::X(1));
        let p1 = Poly::var(n, Var::P(1));
        let e = &(&t * &x1.pow(2)) + &(&p1.scale(&ratio(3, 2)) * &x1);
        let d = e.derivative(Var::X(1));
        assert_eq!(d, &(&t * &x1).scale(&rat(2)) + &p1.scale(&ratio(3, 2)));
        let groups = e.collect_by(|v| v.is_derivative());
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[&Monomial::var(Var::P(1))], x1.scale(&ratio(3, 2)));
    }

    #[test]
    fn substitute_p() {
        let n = 1;
        let x1 = Poly::var(n, Var::X(1));
        let p1 = Poly::var(n, Var::P(1));
        let e = &p1 - &x1.pow(2);
        let sq = x1.pow(2);
        let r = e.substitute(&|v| (v == Var::P(1)).then(|| sq.clone()));
        assert!(r.is_zero());
    }
}
