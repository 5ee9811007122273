//! Contact symmetry generators of a quadratic homogeneous system.
//!
//! Every choice of `T` and `K₁..Kₙ` yields a symmetry once the `∂p` part is
//! fixed to `Pᵢ = Σⱼₖ Kⱼ bⁱⱼₖ xₖ` with `bⁱⱼₖ = aⁱⱼₖ + aⁱₖⱼ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{is_zero, parse_expr, Expr, ParseError, Rational, ZeroTestConfig};
use crate::fields::{FieldError, VectorField};
use crate::jet::SystemRhs;
use crate::report::{SymbolicCheck, VerificationReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContactError {
    #[error("spec has {got} K components, system has dimension {n}")]
    DimensionMismatch { n: usize, got: usize },
    #[error("example {id} needs parameter {param}")]
    MissingParam { id: &'static str, param: &'static str },
    #[error("example {id}: index i = {i} outside 1..={n}")]
    IndexOutOfRange { id: &'static str, i: usize, n: usize },
    #[error("unknown example {0:?} (expected 3.3 to 3.8)")]
    UnknownExample(String),
    #[error("cannot parse {what}: {source}")]
    Parse { what: String, source: ParseError },
    #[error("malformed generator {0:?} (expected \"T=<expr>;K=<expr>,<expr>,...\")")]
    MalformedGenerator(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Free data `T, K₁..Kₙ` of a contact generator, over `(t, x, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSpec {
    pub t: Expr,
    pub k: Vec<Expr>,
}

impl ContactSpec {
    pub fn new(t: Expr, k: Vec<Expr>) -> Self {
        ContactSpec { t, k }
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// Parses `T` and each `Kᵢ` from text.
    pub fn parse(t: &str, k: &[impl AsRef<str>]) -> Result<Self, ContactError> {
        let parse = |what: String, s: &str| parse_expr(s).map_err(|source| ContactError::Parse { what, source });
        Ok(ContactSpec {
            t: parse("T".into(), t)?,
            k: k.iter().enumerate().map(|(i, s)| parse(format!("K{}", i + 1), s.as_ref())).collect::<Result<_, _>>()?,
        })
    }

    /// Parses `"T=<expr>;K=<expr>,<expr>"`.
    pub fn parse_generator(s: &str) -> Result<Self, ContactError> {
        let bad = || ContactError::MalformedGenerator(s.to_string());
        let (mut t, mut k) = (None, None);
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, val) = part.split_once('=').ok_or_else(bad)?;
            match key.trim() {
                "T" => t = Some(val.trim().to_string()),
                "K" => k = Some(val.split(',').map(|v| v.trim().to_string()).collect::<Vec<_>>()),
                _ => return Err(bad()),
            }
        }
        Self::parse(&t.ok_or_else(bad)?, &k.ok_or_else(bad)?)
    }

    pub fn add(&self, other: &ContactSpec) -> ContactSpec {
        assert_eq!(self.dim(), other.dim(), "spec dimension");
        ContactSpec { t: &self.t + &other.t, k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect() }
    }
}

impl fmt::Display for ContactSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T={};K=", self.t)?;
        for (i, k) in self.k.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

/// `Σⱼ Kⱼ Σₖ bⁱⱼₖ xₖ` for each `i`.
pub fn p_components(sys: &SystemRhs, k: &[Expr]) -> Vec<Expr> {
    let n = sys.dim();
    (1..=n)
        .map(|i| {
            Expr::sum((1..=n).filter(|&j| !k[j - 1].is_const_zero()).map(|j| {
                let lin = sys.linear_form(i, j);
                &k[j - 1] * &Expr::from_poly(&lin)
            }))
        })
        .collect()
}

pub fn build_contact_field(sys: &SystemRhs, spec: &ContactSpec) -> Result<VectorField, ContactError> {
    if spec.dim() != sys.dim() {
        return Err(ContactError::DimensionMismatch { n: sys.dim(), got: spec.dim() });
    }
    let p = p_components(sys, &spec.k);
    Ok(VectorField::contact(sys.dim(), spec.t.clone(), spec.k.clone(), p)?)
}

/// The split `v₁ = T ∂t`, `vⱼ₊₁ = Kⱼ (∂xⱼ + Σᵢₖ bⁱⱼₖ xₖ ∂pᵢ)`.
pub fn split_generators(sys: &SystemRhs, spec: &ContactSpec) -> Result<Vec<VectorField>, ContactError> {
    let n = sys.dim();
    if spec.dim() != n {
        return Err(ContactError::DimensionMismatch { n, got: spec.dim() });
    }
    let mut gens = vec![VectorField::contact(n, spec.t.clone(), vec![Expr::zero(); n], vec![Expr::zero(); n])?];
    for j in 1..=n {
        let mut k = vec![Expr::zero(); n];
        k[j - 1] = spec.k[j - 1].clone();
        gens.push(build_contact_field(sys, &ContactSpec::new(Expr::zero(), k))?);
    }
    Ok(gens)
}

/// Residuals `v[pᵢ − Fᵢ]`; Pass iff each is zero.
pub fn verify_contact_symmetry(sys: &SystemRhs, v: &VectorField, cfg: &ZeroTestConfig) -> VerificationReport {
    let checks = (1..=sys.dim())
        .map(|i| {
            let r = v.apply(&(Expr::p(i) - sys.f_expr(i))).normalize();
            SymbolicCheck { label: format!("v[p{i} - F{i}]"), residual: r.to_string(), result: is_zero(&r, cfg) }
        })
        .collect();
    VerificationReport::new(format!("contact symmetry {v}"), checks, None, *cfg)
}

/// The worked generators, with their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ExampleId {
    /// `T = 1`, `K = 0`.
    E33,
    /// `T = 1`, `Kᵢ = 1`, other `K` zero.
    E34 { i: usize },
    /// `T = t`, `Kᵢ = 1`, other `K` zero.
    E35 { i: usize },
    /// `T = c t`, every `K = 1`.
    E36 { c: Rational },
    /// `T = 0`, `Kⱼ = xⱼ`.
    E37,
    /// `T = 0`, `Kⱼ = pⱼ`.
    E38,
}

impl ExampleId {
    pub const IDS: [&'static str; 6] = ["3.3", "3.4", "3.5", "3.6", "3.7", "3.8"];

    pub fn from_parts(id: &str, i: Option<usize>, c: Option<Rational>) -> Result<Self, ContactError> {
        match id {
            "3.3" => Ok(ExampleId::E33),
            "3.4" => Ok(ExampleId::E34 { i: i.ok_or(ContactError::MissingParam { id: "3.4", param: "i" })? }),
            "3.5" => Ok(ExampleId::E35 { i: i.ok_or(ContactError::MissingParam { id: "3.5", param: "i" })? }),
            "3.6" => Ok(ExampleId::E36 { c: c.ok_or(ContactError::MissingParam { id: "3.6", param: "c" })? }),
            "3.7" => Ok(ExampleId::E37),
            "3.8" => Ok(ExampleId::E38),
            other => Err(ContactError::UnknownExample(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            ExampleId::E33 => "3.3",
            ExampleId::E34 { .. } => "3.4",
            ExampleId::E35 { .. } => "3.5",
            ExampleId::E36 { .. } => "3.6",
            ExampleId::E37 => "3.7",
            ExampleId::E38 => "3.8",
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            ExampleId::E34 { i } | ExampleId::E35 { i } => Some(*i),
            _ => None,
        }
    }

    pub fn c(&self) -> Option<&Rational> {
        match self {
            ExampleId::E36 { c } => Some(c),
            _ => None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), ContactError> {
        match self.index() {
            Some(i) if i == 0 || i > n => Err(ContactError::IndexOutOfRange { id: self.id(), i, n }),
            _ => Ok(()),
        }
    }

    pub fn spec(&self, n: usize) -> Result<ContactSpec, ContactError> {
        self.validate(n)?;
        let unit_k = |i: usize| (1..=n).map(|j| if j == i { Expr::one() } else { Expr::zero() }).collect();
        Ok(match self {
            ExampleId::E33 => ContactSpec::new(Expr::one(), vec![Expr::zero(); n]),
            ExampleId::E34 { i } => ContactSpec::new(Expr::one(), unit_k(*i)),
            ExampleId::E35 { i } => ContactSpec::new(Expr::t(), unit_k(*i)),
            ExampleId::E36 { c } => ContactSpec::new(Expr::t().scale(c), vec![Expr::one(); n]),
            ExampleId::E37 => ContactSpec::new(Expr::zero(), (1..=n).map(Expr::x).collect()),
            ExampleId::E38 => ContactSpec::new(Expr::zero(), (1..=n).map(Expr::p).collect()),
        })
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleId::E34 { i } | ExampleId::E35 { i } => write!(f, "{}(i={i})", self.id()),
            ExampleId::E36 { c } => write!(f, "3.6(c={c})"),
            _ => f.write_str(self.id()),
        }
    }
}

impl FromStr for ExampleId {
    type Err = ContactError;

    /// Accepts `3.3`, `3.4(i=2)`, `3.6(c=1/2)` and so on.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (id, args) = match s.split_once('(') {
            Some((id, rest)) => (id, rest.strip_suffix(')').ok_or_else(|| ContactError::UnknownExample(s.into()))?),
            None => (s, ""),
        };
        let (mut i, mut c) = (None, None);
        for arg in args.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            match arg.split_once('=') {
                Some(("i", v)) => i = Some(v.trim().parse().map_err(|_| ContactError::UnknownExample(s.into()))?),
                Some(("c", v)) => {
                    c = Some(
                        crate::algebra::parse_rational(v.trim()).map_err(|_| ContactError::UnknownExample(s.into()))?,
                    )
                }
                _ => return Err(ContactError::UnknownExample(s.into())),
            }
        }
        ExampleId::from_parts(id.trim(), i, c)
    }
}

impl Serialize for ExampleId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExampleId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn example_generator(sys: &SystemRhs, ex: &ExampleId) -> Result<VectorField, ContactError> {
    build_contact_field(sys, &ex.spec(sys.dim())?)
}

/// Whether `v` and `w` have identical coefficients, ignoring kind tags.
pub fn same_coefficients(v: &VectorField, w: &VectorField) -> bool {
    v.dim() == w.dim() && v.components().zip(w.components()).all(|((_, a), (_, b))| (a - b).normalize().is_const_zero())
}
