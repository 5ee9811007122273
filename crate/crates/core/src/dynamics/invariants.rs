use serde::{Deserialize, Serialize};

use crate::algebra::{is_zero, Expr, ZeroTestConfig};
use crate::contact::{ContactSpec, ExampleId};
use crate::determining::{invariants_of_point_basis, PointInvariants, SymmetryBasis};
use crate::fields::VectorField;
use crate::jet::{JetPoint, SystemRhs};
use crate::par;
use crate::report::{SymbolicCheck, VerificationReport};
use crate::sample::seeded_point;

use super::flow::{integrate_flow, NumericOptions, Tally};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantSource {
    /// First integrals of time translation.
    Eq13,
    /// Quadrature template instantiated where the integrals are elementary.
    Eq18Template,
    Example36,
    Example37,
    Example38,
    /// Worked out here; not printed in the source formulas.
    Derived,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Invariant {
    pub label: String,
    #[serde(with = "expr_text")]
    pub expr: Expr,
    pub source: InvariantSource,
    /// Replacement for a printed formula that fails verification.
    pub corrected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Invariant {
    pub fn new(label: impl Into<String>, expr: Expr, source: InvariantSource) -> Self {
        Invariant { label: label.into(), expr: expr.normalize(), source, corrected: false, note: None }
    }

    fn corrected(mut self) -> Self {
        self.corrected = true;
        self
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

mod expr_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::algebra::{parse_expr, Expr};

    pub fn serialize<S: Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(e)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let s = String::deserialize(d)?;
        parse_expr(&s).map(|e| e.normalize()).map_err(serde::de::Error::custom)
    }
}

pub enum CatalogQuery<'a> {
    PointBasis(&'a SymmetryBasis),
    Example(&'a ExampleId),
    Spec(&'a ContactSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Catalog {
    Invariants(Vec<Invariant>),
    Unsupported { reason: String },
}

impl Catalog {
    pub fn invariants(&self) -> &[Invariant] {
        match self {
            Catalog::Invariants(v) => v,
            Catalog::Unsupported { .. } => &[],
        }
    }
}

pub const K_ALPHA_NOTE: &str = "printed k_alpha read as x_alpha";

fn lin(sys: &SystemRhs, i: usize, j: usize) -> Expr {
    Expr::from_poly(&sys.linear_form(i, j))
}

fn f_minus_p(sys: &SystemRhs, m: usize, label: String, source: InvariantSource) -> Invariant {
    Invariant::new(label, sys.f_expr(m) - Expr::p(m), source)
}

/// Printed invariant lists, plus a corrected replacement for each printed
/// formula whose residual under the example generator is not zero.
pub fn invariant_catalog(query: CatalogQuery<'_>, sys: &SystemRhs) -> Catalog {
    let n = sys.dim();
    let ex = match query {
        CatalogQuery::PointBasis(basis) => {
            return match invariants_of_point_basis(basis) {
                PointInvariants::Invariants(list) => Catalog::Invariants(
                    list.into_iter()
                        .enumerate()
                        .map(|(i, e)| Invariant::new(format!("I{}", i + 1), e, InvariantSource::Eq13))
                        .collect(),
                ),
                PointInvariants::Unsupported => {
                    Catalog::Unsupported { reason: "only the basis {c ∂t} has catalogued first integrals".into() }
                }
            }
        }
        CatalogQuery::Spec(_) => {
            return Catalog::Unsupported {
                reason: "quadrature templates are only instantiated for the worked examples".into(),
            }
        }
        CatalogQuery::Example(ex) => ex,
    };
    if ex.validate(n).is_err() {
        return Catalog::Unsupported { reason: format!("example {ex} is invalid for n = {n}") };
    }
    let label = |k: usize| format!("I{k}");
    let mut out: Vec<(Invariant, Option<Invariant>)> = Vec::new();
    match ex {
        ExampleId::E33 => {
            for i in 1..=n {
                out.push((Invariant::new(label(i), -Expr::x(i), InvariantSource::Eq18Template), None));
            }
            for m in 1..=n {
                out.push((Invariant::new(label(n + m), -Expr::p(m), InvariantSource::Eq18Template), None));
            }
        }
        ExampleId::E34 { i } | ExampleId::E35 { i } => {
            let i = *i;
            for j in 1..=n {
                let e = match (ex, j == i) {
                    (ExampleId::E34 { .. }, true) => Expr::t() - Expr::x(i),
                    (_, true) => Expr::t() * Expr::exp(-Expr::x(i)),
                    (_, false) => Expr::x(j),
                };
                out.push((Invariant::new(label(j), e, InvariantSource::Derived), None));
            }
            for m in 1..=n {
                out.push((f_minus_p(sys, m, label(n + m), InvariantSource::Derived), None));
            }
        }
        ExampleId::E36 { c } => {
            let ce = Expr::Const(c.clone());
            for a in 1..=n {
                let printed =
                    Invariant::new(label(a), Expr::t() * (Expr::one() - &ce * &Expr::x(a)), InvariantSource::Example36)
                        .with_note(K_ALPHA_NOTE);
                let fixed =
                    Invariant::new(label(a), Expr::t() * Expr::exp(-(&ce * &Expr::x(a))), InvariantSource::Derived)
                        .corrected();
                out.push((printed, Some(fixed)));
            }
            for m in 1..=n {
                let sum = Expr::sum((1..=n).map(|j| lin(sys, m, j)));
                let printed = Invariant::new(
                    label(n + m),
                    Expr::t() * sum - &ce * &Expr::t() * Expr::p(m),
                    InvariantSource::Example36,
                );
                out.push((printed, Some(f_minus_p(sys, m, label(n + m), InvariantSource::Derived).corrected())));
            }
        }
        ExampleId::E37 => {
            out.push((Invariant::new(label(1), Expr::t(), InvariantSource::Example37), None));
            for a in 2..=n {
                let e = Expr::ln(Expr::x(a)) - Expr::ln(Expr::x(a - 1));
                out.push((Invariant::new(label(a), e, InvariantSource::Example37), None));
            }
            let b = |i: usize, j: usize, k: usize| Expr::Const(sys.b(i, j, k).clone());
            for m in 1..=n {
                let cubic = Expr::sum(
                    (1..=n)
                        .filter(|&j| j != m)
                        .flat_map(|j| (1..=n).filter(|&k| k != m).map(move |k| (j, k)))
                        .map(|(j, k)| Expr::product([b(m, j, k), Expr::x(j), Expr::x(k), Expr::x(m)])),
                );
                let mixed =
                    Expr::sum((1..=n).filter(|&k| k != m).map(|k| Expr::product([b(m, m, k), Expr::x(k), Expr::x(m)])));
                let diag = Expr::Const(sys.tensor().get(m, m, m).clone()) * Expr::pow(Expr::x(m), 2);
                let printed = Invariant::new(
                    label(n + m),
                    Expr::sum([cubic, mixed, diag, -Expr::p(m)]),
                    InvariantSource::Example37,
                );
                out.push((printed, Some(f_minus_p(sys, m, label(n + m), InvariantSource::Derived).corrected())));
            }
        }
        ExampleId::E38 => {
            out.push((Invariant::new(label(1), Expr::t(), InvariantSource::Example38), None));
            for a in 2..=n {
                let e = Expr::p(a) * Expr::x(a - 1) - Expr::p(a - 1) * Expr::x(a);
                out.push((Invariant::new(label(a), e, InvariantSource::Example38), None));
            }
            for m in 1..=n {
                let l = lin(sys, m, m);
                let all = Expr::sum((1..=n).map(|j| Expr::p(j) * lin(sys, m, j)));
                let others = Expr::sum((1..=n).filter(|&j| j != m).map(|j| Expr::p(j) * lin(sys, m, j)));
                let e = Expr::p(m) * Expr::recip(l.clone()) - Expr::ln(all) * others * Expr::pow(l, -2);
                let printed = Invariant::new(label(n + m), e, InvariantSource::Example38);
                out.push((printed, Some(f_minus_p(sys, m, label(n + m), InvariantSource::Derived).corrected())));
            }
        }
    }
    let v = crate::contact::example_generator(sys, ex).expect("validated example");
    let cfg = ZeroTestConfig::default();
    let mut list = Vec::new();
    for (printed, fixed) in out {
        let fails = !is_zero(&v.apply(&printed.expr), &cfg).is_zero();
        list.push(printed);
        if let Some(f) = fixed.filter(|_| fails) {
            list.push(f);
        }
    }
    Catalog::Invariants(list)
}

/// `(s, z(s))` along one trajectory; `Err` carries a domain error.
pub type Path = Vec<(f64, Result<JetPoint, String>)>;

/// Flow samples `(seed, z0, [(s, z(s))])`, shared by several invariants.
pub struct Trajectories {
    pub n: usize,
    pub samples: Vec<(u64, JetPoint, Path)>,
}

impl Trajectories {
    pub fn compute(v: &VectorField, opts: &NumericOptions) -> Self {
        let n = v.dim();
        let samples = par::map(&opts.seeds, |&seed| {
            let z0 = seeded_point(seed, n);
            let path = opts
                .s_grid
                .iter()
                .map(|&s| (s, integrate_flow(v, &z0, s, opts.step).map_err(|e| e.to_string())))
                .collect();
            (seed, z0, path)
        });
        Trajectories { n, samples }
    }
}

/// Symbolic residual `v[I]` plus drift of `I` along sampled trajectories.
pub fn verify_invariant(
    v: &VectorField,
    inv: &Invariant,
    opts: &NumericOptions,
    cfg: &ZeroTestConfig,
) -> VerificationReport {
    verify_on(v, inv, &Trajectories::compute(v, opts), opts, cfg)
}

pub fn verify_invariants(
    v: &VectorField,
    invs: &[Invariant],
    opts: &NumericOptions,
    cfg: &ZeroTestConfig,
) -> Vec<VerificationReport> {
    let traj = Trajectories::compute(v, opts);
    invs.iter().map(|inv| verify_on(v, inv, &traj, opts, cfg)).collect()
}

fn verify_on(
    v: &VectorField,
    inv: &Invariant,
    traj: &Trajectories,
    opts: &NumericOptions,
    cfg: &ZeroTestConfig,
) -> VerificationReport {
    assert!(opts.tol > 0.0, "tolerance must be positive");
    let residual = v.apply(&inv.expr).normalize();
    let symbolic = vec![SymbolicCheck {
        label: format!("v[{}]", inv.label),
        residual: residual.to_string(),
        result: is_zero(&residual, cfg),
    }];
    let mut tally = Tally::default();
    for (seed, z0, path) in &traj.samples {
        let start = inv.expr.evaluate(z0);
        for (s, z) in path {
            let err = match (&start, z) {
                (Ok(i0), Ok(z)) => inv.expr.evaluate(z).map(|i| (i - i0).abs()).map_err(|e| e.to_string()),
                (Err(e), _) => Err(format!("at z0: {e}")),
                (_, Err(e)) => Err(e.clone()),
            };
            tally.record(*seed, *s, z0, err);
        }
    }
    let numeric = tally.finish(opts, opts.tol);
    let mut report = VerificationReport::new(format!("{} = {}", inv.label, inv.expr), symbolic, Some(numeric), *cfg);
    if let Some(note) = &inv.note {
        report.notes.push(note.clone());
    }
    report
}
