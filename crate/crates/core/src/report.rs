//! Serializable verification results.

use serde::{Deserialize, Serialize};

use crate::algebra::{ZeroTest, ZeroTestConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Too many samples hit evaluation domain errors.
    FailDomain,
    /// Informational result, nothing asserted.
    NoVerdict,
}

impl Verdict {
    pub fn is_failure(self) -> bool {
        matches!(self, Verdict::Fail | Verdict::FailDomain)
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::FailDomain => "FAIL(domain)",
            Verdict::NoVerdict => "n/a",
        }
    }
}

/// Zero test of one symbolic residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicCheck {
    pub label: String,
    pub residual: String,
    pub result: ZeroTest,
}

/// Location of the worst numeric sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub seed: u64,
    pub s: f64,
    pub z0: Vec<f64>,
    pub error: f64,
}

/// Sampled numeric comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericCheck {
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub domain_errors: usize,
    pub worst: Option<Sample>,
    pub seeds: Vec<u64>,
    pub s_grid: Vec<f64>,
    pub step: f64,
    /// First domain error, if any, rendered for the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_domain_error: Option<String>,
}

impl NumericCheck {
    /// Domain errors are tolerated below 10% of the samples attempted.
    pub fn domain_ok(&self) -> bool {
        let attempted = self.samples + self.domain_errors;
        attempted > 0 && self.samples > 0 && self.domain_errors * 10 < attempted
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_error <= self.tolerance
    }

    pub fn verdict(&self) -> Verdict {
        if !self.domain_ok() {
            Verdict::FailDomain
        } else if self.within_tolerance() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub subject: String,
    pub symbolic: Vec<SymbolicCheck>,
    pub numeric: Option<NumericCheck>,
    pub verdict: Verdict,
    pub zero_test: ZeroTestConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Pass iff every residual is zero and the numeric part (if any) passes.
    /// An undetermined zero test counts as a domain failure.
    pub fn new(
        subject: impl Into<String>,
        symbolic: Vec<SymbolicCheck>,
        numeric: Option<NumericCheck>,
        zero_test: ZeroTestConfig,
    ) -> Self {
        let verdict = combine_verdicts(&symbolic, numeric.as_ref());
        VerificationReport { subject: subject.into(), symbolic, numeric, verdict, zero_test, notes: Vec::new() }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn symbolic_zero(&self) -> bool {
        self.symbolic.iter().all(|c| c.result.is_zero())
    }

    pub fn symbolic_exact(&self) -> bool {
        self.symbolic.iter().all(|c| c.result.is_exact())
    }
}

fn combine_verdicts(symbolic: &[SymbolicCheck], numeric: Option<&NumericCheck>) -> Verdict {
    if symbolic.iter().any(|c| matches!(c.result, ZeroTest::NonZero { .. })) {
        return Verdict::Fail;
    }
    if symbolic.iter().any(|c| matches!(c.result, ZeroTest::Undetermined { .. })) {
        return Verdict::FailDomain;
    }
    numeric.map_or(Verdict::Pass, NumericCheck::verdict)
}
