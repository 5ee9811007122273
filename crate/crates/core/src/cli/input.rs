//! System files: `{"n": 2, "a": [{"i": 1, "j": 1, "k": 2, "value": "3/2"}]}`
//! with 1-based indices and exact values given as strings or integers.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{parse_rational, serde_str, Rational};
use crate::jet::CoeffTensor;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {msg}")]
    Syntax { path: String, line: usize, column: usize, msg: String },
    #[error("{path}: entry {index} (i={i}, j={j}, k={k}): {msg}")]
    Entry { path: String, index: usize, i: usize, j: usize, k: usize, msg: String },
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n: usize,
    a: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    i: usize,
    j: usize,
    k: usize,
    value: RawValue,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawValue {
    Text(String),
    Int(i64),
    Float(f64),
}

/// One nonzero coefficient, as echoed in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    #[serde(with = "serde_str")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEcho {
    pub n: usize,
    pub a: Vec<TensorEntry>,
}

impl TensorEcho {
    pub fn of(t: &CoeffTensor) -> Self {
        TensorEcho {
            n: t.dim(),
            a: t.nonzero_entries().into_iter().map(|(i, j, k, value)| TensorEntry { i, j, k, value }).collect(),
        }
    }
}

pub fn parse_system(path: &Path) -> Result<CoeffTensor, InputError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io { path: shown.clone(), source })?;
    parse_system_str(&text, &shown)
}

/// Duplicate `(i, j, k)` entries are rejected rather than summed.
pub fn parse_system_str(text: &str, path: &str) -> Result<CoeffTensor, InputError> {
    let raw: RawSystem = serde_json::from_str(text).map_err(|e| InputError::Syntax {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string().split(" at line").next().unwrap_or_default().to_string(),
    })?;
    if raw.n == 0 {
        return Err(InputError::Invalid { path: path.into(), msg: "n must be at least 1".into() });
    }
    let mut tensor = CoeffTensor::zeros(raw.n);
    let mut seen = BTreeSet::new();
    for (index, e) in raw.a.iter().enumerate() {
        let fail = |msg: String| InputError::Entry { path: path.into(), index, i: e.i, j: e.j, k: e.k, msg };
        if [e.i, e.j, e.k].iter().any(|&x| x == 0 || x > raw.n) {
            return Err(fail(format!("indices must lie in 1..={}", raw.n)));
        }
        if !seen.insert((e.i, e.j, e.k)) {
            return Err(fail("duplicate entry".into()));
        }
        let value = match &e.value {
            RawValue::Text(s) => parse_rational(s).map_err(|err| fail(err.to_string()))?,
            RawValue::Int(v) => Rational::from_integer((*v).into()),
            RawValue::Float(v) => {
                return Err(fail(format!("value {v} is a float; write it as a string such as \"{v}\" or \"p/q\"")))
            }
        };
        tensor.set(e.i, e.j, e.k, value);
    }
    Ok(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ratio;

    fn parse(s: &str) -> Result<CoeffTensor, InputError> {
        parse_system_str(s, "sys.json")
    }

    #[test]
    fn accepted_forms() {
        assert_eq!(
            parse(r#"{"n":1,"a":[{"i":1,"j":1,"k":1,"value":"1"}]}"#).unwrap(),
            CoeffTensor::decoupled_squares(1)
        );
        assert_eq!(parse(r#"{"n":2,"a":[]}"#).unwrap(), CoeffTensor::zeros(2));
        let t = parse(r#"{"n":2,"a":[{"i":2,"j":1,"k":2,"value":"-3/4"},{"i":1,"j":1,"k":1,"value":2}]}"#).unwrap();
        assert_eq!(t.get(2, 1, 2), &ratio(-3, 4));
        assert_eq!(TensorEcho::of(&t).a.len(), 2);
    }

    #[test]
    fn diagnostics() {
        let msg = |s: &str| parse(s).unwrap_err().to_string();
        assert_eq!(
            msg(r#"{"n":2,"a":[{"i":3,"j":1,"k":1,"value":"1"}]}"#),
            "sys.json: entry 0 (i=3, j=1, k=1): indices must lie in 1..=2"
        );
        assert!(msg(r#"{"n":1,"a":[{"i":1,"j":1,"k":1,"value":"x"}]}"#).contains("entry 0"));
        assert!(msg(r#"{"n":1,"a":[{"i":1,"j":1,"k":1,"value":0.5}]}"#).contains("float"));
        assert!(msg("{\"n\":1,\n\"a\":[").starts_with("sys.json: line 2"));
        assert!(msg(r#"{"n":0,"a":[]}"#).contains("n must be"));
        assert!(msg(r#"{"n":1,"a":[{"i":1,"j":1,"k":1,"value":"1"},{"i":1,"j":1,"k":1,"value":"2"}]}"#)
            .contains("duplicate"));
    }
}
