use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A coordinate on the first jet space, plus the flow parameter `s` used by
/// closed-form one-parameter groups.
///
/// The derived ordering is `t < x₁ < … < xₙ < p₁ < … < pₙ < s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    /// State coordinate `xᵢ`, 1-based.
    X(usize),
    /// Derivative coordinate `pᵢ`, 1-based.
    P(usize),
    /// Group parameter of a one-parameter flow.
    S,
}

impl Var {
    /// All jet coordinates of dimension `n`: `t, x₁..xₙ, p₁..pₙ`.
    pub fn jet_coords(n: usize) -> Vec<Var> {
        let mut v = Vec::with_capacity(2 * n + 1);
        v.push(Var::T);
        v.extend((1..=n).map(Var::X));
        v.extend((1..=n).map(Var::P));
        v
    }

    pub fn is_derivative(self) -> bool {
        matches!(self, Var::P(_))
    }

    pub fn index(self) -> Option<usize> {
        match self {
            Var::X(i) | Var::P(i) => Some(i),
            _ => None,
        }
    }

    /// Whether the coordinate exists in dimension `n` (`s` is always allowed).
    pub fn in_dimension(self, n: usize) -> bool {
        match self {
            Var::T | Var::S => true,
            Var::X(i) | Var::P(i) => (1..=n).contains(&i),
        }
    }

    /// Position in the `(t, x, p)` state vector used by the integrator.
    pub fn slot(self, n: usize) -> Option<usize> {
        match self {
            Var::T => Some(0),
            Var::X(i) if (1..=n).contains(&i) => Some(i),
            Var::P(i) if (1..=n).contains(&i) => Some(n + i),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => write!(f, "t"),
            Var::X(i) => write!(f, "x{i}"),
            Var::P(i) => write!(f, "p{i}"),
            Var::S => write!(f, "s"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown variable {0:?}")]
pub struct VarParseError(pub String);

impl FromStr for Var {
    type Err = VarParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || VarParseError(s.to_string());
        match s {
            "t" => return Ok(Var::T),
            "s" => return Ok(Var::S),
            _ => {}
        }
        let (head, rest) = s.split_at(s.chars().next().map_or(0, char::len_utf8));
        let rest = rest.strip_prefix('_').unwrap_or(rest);
        if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let i: usize = rest.parse().map_err(|_| err())?;
        if i == 0 {
            return Err(err());
        }
        match head {
            "x" => Ok(Var::X(i)),
            "p" => Ok(Var::P(i)),
            _ => Err(err()),
        }
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Var {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
