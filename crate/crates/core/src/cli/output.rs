use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::algebra::{serde_str, Rational, ZeroTest};
use crate::dynamics::{FlowCheck, InvariantSource};
use crate::report::{Verdict, VerificationReport};

use super::input::TensorEcho;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    Strict,
    OnShell,
    Both,
}

/// Everything that influences a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: ModeChoice,
    pub degree: u32,
    pub tol_flow: f64,
    pub tol_drift: f64,
    pub step: f64,
    pub seed: u64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    pub mode: String,
    pub degree: u32,
    pub dimension: usize,
    pub fields: Vec<String>,
    /// Nonzero ansatz coefficients per basis vector, keyed like `K1[t*x1]`.
    pub coefficients: Vec<BTreeMap<String, String>>,
    pub first_integrals: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub label: String,
    pub source: InvariantSource,
    pub corrected: bool,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub i: usize,
    pub j: usize,
    pub bracket: String,
    /// Constant coefficients over the generators, when the bracket is in their span.
    #[serde(default, with = "opt_rationals", skip_serializing_if = "Option::is_none")]
    pub expansion: Option<Vec<Rational>>,
    pub exact: bool,
    /// Printed commutator claim for this pair, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub generators: Vec<String>,
    pub cells: Vec<TableCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum CommandResult {
    Point {
        bases: Vec<BasisReport>,
    },
    Contact {
        generator: String,
        spec: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        example: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symmetry: Option<VerificationReport>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        flows: Vec<FlowCheck>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        invariants: Vec<InvariantReport>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<TableReport>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        notes: Vec<String>,
    },
    Table {
        table: TableReport,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tensor: TensorEcho,
    pub config: RunConfig,
    pub result: CommandResult,
    pub summary: Summary,
}

impl Report {
    pub fn new(tensor: TensorEcho, config: RunConfig, result: CommandResult) -> Self {
        let verdicts = verdicts(&result);
        let failed = verdicts.iter().filter(|v| v.is_failure()).count();
        let passed = verdicts.iter().filter(|v| **v == Verdict::Pass).count();
        let verdict = if failed > 0 {
            Verdict::Fail
        } else if passed > 0 {
            Verdict::Pass
        } else {
            Verdict::NoVerdict
        };
        Report { tensor, config, result, summary: Summary { checks: verdicts.len(), passed, failed, verdict } }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> u8 {
        match self.result {
            CommandResult::Contact { .. } if self.summary.failed > 0 => 1,
            _ => 0,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let t = &self.tensor;
        let _ = writeln!(out, "system: n = {}, {} nonzero coefficient(s)", t.n, t.a.len());
        match &self.result {
            CommandResult::Point { bases } => {
                for b in bases {
                    let _ =
                        writeln!(out, "point symmetries ({}, degree {}): dimension {}", b.mode, b.degree, b.dimension);
                    for (k, f) in b.fields.iter().enumerate() {
                        let _ = writeln!(out, "  {}. {f}", k + 1);
                    }
                    match &b.first_integrals {
                        Some(list) => {
                            let _ = writeln!(out, "  first integrals: {}", list.join(", "));
                        }
                        None => {
                            let _ = writeln!(out, "  first integrals: unsupported for this basis");
                        }
                    }
                }
            }
            CommandResult::Contact { generator, example, symmetry, flows, invariants, table, notes, .. } => {
                let tag = example.as_ref().map(|e| format!("  [example {e}]")).unwrap_or_default();
                let _ = writeln!(out, "generator: {generator}{tag}");
                if let Some(r) = symmetry {
                    let _ = writeln!(out, "symmetry condition: {}{}", r.verdict.label(), exactness(r));
                    for c in r.symbolic.iter().filter(|c| !c.result.is_zero()) {
                        let _ = writeln!(out, "  {} = {}", c.label, c.residual);
                    }
                }
                for f in flows {
                    let _ = write!(out, "flow {} [{}]: {}", f.example, f.variant, f.report.verdict.label());
                    if let Some(n) = &f.report.numeric {
                        let _ = write!(out, "  max |closed - rk4| = {:.3e} (tol {:.0e})", n.max_error, n.tolerance);
                    }
                    if let Some(g) = &f.group_law {
                        let _ = write!(out, "  group law {:.3e}", g.max_error);
                    }
                    out.push('\n');
                }
                for inv in invariants {
                    let r = &inv.report;
                    let tag = if inv.corrected { " corrected" } else { "" };
                    let _ = write!(out, "invariant {} [{:?}{tag}]: {}", r.subject, inv.source, r.verdict.label());
                    if let Some(c) = r.symbolic.first() {
                        let _ = write!(out, "  v[I] = {} ({})", c.residual, zero_label(&c.result));
                    }
                    if let Some(n) = &r.numeric {
                        let _ = write!(out, "  drift {:.3e}", n.max_error);
                        if n.domain_errors > 0 {
                            let _ = write!(out, " ({} domain errors)", n.domain_errors);
                        }
                    }
                    out.push('\n');
                    for note in &r.notes {
                        let _ = writeln!(out, "  note: {note}");
                    }
                }
                if let Some(tab) = table {
                    write_table(&mut out, tab);
                }
                for note in notes {
                    let _ = writeln!(out, "note: {note}");
                }
            }
            CommandResult::Table { table } => write_table(&mut out, table),
        }
        let s = &self.summary;
        let _ =
            writeln!(out, "summary: {} checks, {} pass, {} fail: {}", s.checks, s.passed, s.failed, s.verdict.label());
        out
    }
}

fn exactness(r: &VerificationReport) -> &'static str {
    if r.symbolic_exact() {
        " (exact)"
    } else if r.symbolic_zero() {
        " (probabilistic)"
    } else {
        ""
    }
}

fn zero_label(z: &ZeroTest) -> &'static str {
    match z {
        ZeroTest::ExactZero => "exact zero",
        ZeroTest::ProbablyZero { .. } => "probably zero",
        ZeroTest::NonZero { .. } => "nonzero",
        ZeroTest::Undetermined { .. } => "undetermined",
    }
}

fn write_table(out: &mut String, t: &TableReport) {
    let _ = writeln!(out, "generators:");
    for (k, g) in t.generators.iter().enumerate() {
        let _ = writeln!(out, "  g{} = {g}", k + 1);
    }
    for c in t.cells.iter().filter(|c| c.i < c.j) {
        let expansion = match &c.expansion {
            Some(coeffs) => {
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| **q != Rational::from_integer(0.into()))
                    .map(|(k, q)| format!("{q}*g{}", k + 1))
                    .collect();
                if terms.is_empty() {
                    "0".to_string()
                } else {
                    terms.join(" + ")
                }
            }
            None => "not in span".to_string(),
        };
        let _ = write!(out, "  [g{}, g{}] = {}  => {expansion}", c.i, c.j, c.bracket);
        if let (Some(claim), Some(holds)) = (&c.claim, c.claim_holds) {
            let _ = write!(out, "  (printed: {claim}, {})", if holds { "agrees" } else { "disagrees" });
        }
        out.push('\n');
    }
}

fn verdicts(result: &CommandResult) -> Vec<Verdict> {
    match result {
        CommandResult::Point { .. } | CommandResult::Table { .. } => Vec::new(),
        CommandResult::Contact { symmetry, flows, invariants, .. } => symmetry
            .iter()
            .map(|r| r.verdict)
            .chain(flows.iter().map(|f| f.report.verdict))
            .chain(invariants.iter().map(|i| i.report.verdict))
            .collect(),
    }
}

mod opt_rationals {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{serde_str, Rational};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "serde_str::vec")] Vec<Rational>);

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => Wrap(v.clone()).serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rational>>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
