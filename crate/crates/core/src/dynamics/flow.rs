use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{is_zero, Bindings, EvalError, Expr, Rational, Var, ZeroTestConfig};
use crate::contact::{example_generator, ContactError, ExampleId};
use crate::fields::VectorField;
use crate::jet::{JetPoint, SystemRhs};
use crate::par;
use crate::report::{NumericCheck, Sample, SymbolicCheck, Verdict, VerificationReport};
use crate::sample::seeded_point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("z0 has dimension {got}, field has {n}")]
    DimensionMismatch { n: usize, got: usize },
    #[error("evaluation failed at s = {s}: {source}")]
    Domain { s: f64, source: EvalError },
}

/// `dz/ds = (T, K, P)(z)` in the slot order `t, x₁..xₙ, p₁..pₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSystem {
    pub n: usize,
    pub rhs: Vec<Expr>,
}

impl CharacteristicSystem {
    pub fn eval(&self, z: &[f64]) -> Result<Vec<f64>, EvalError> {
        let env = SlotBindings { n: self.n, z, s: None };
        self.rhs.iter().map(|e| e.evaluate(&env)).collect()
    }
}

pub fn characteristic_system(v: &VectorField) -> CharacteristicSystem {
    CharacteristicSystem { n: v.dim(), rhs: v.components().map(|(_, e)| e.clone()).collect() }
}

/// Flat jet vector, optionally with a flow parameter.
struct SlotBindings<'a> {
    n: usize,
    z: &'a [f64],
    s: Option<f64>,
}

impl Bindings for SlotBindings<'_> {
    fn value(&self, v: Var) -> Option<f64> {
        match v {
            Var::S => self.s,
            _ => v.slot(self.n).and_then(|i| self.z.get(i).copied()),
        }
    }
}

fn axpy(z: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    z.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Classical RK4 from `s = 0` to `s` with fixed step; the last step is
/// shortened to land on `s` exactly. Negative `s` integrates backwards.
pub fn integrate_flow(v: &VectorField, z0: &JetPoint, s: f64, step: f64) -> Result<JetPoint, FlowError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(FlowError::BadStep(step));
    }
    if z0.dim() != v.dim() {
        return Err(FlowError::DimensionMismatch { n: v.dim(), got: z0.dim() });
    }
    let sys = characteristic_system(v);
    let dir = if s < 0.0 { -1.0 } else { 1.0 };
    let total = s.abs();
    let full = (total / step).floor() as u64;
    let rem = total - full as f64 * step;
    let steps = (0..full).map(|_| step).chain((rem > 0.0).then_some(rem));
    let mut z = z0.to_vec();
    let mut done = 0.0;
    for h in steps {
        let h = dir * h;
        let fail = |source| FlowError::Domain { s: done, source };
        let k1 = sys.eval(&z).map_err(fail)?;
        let k2 = sys.eval(&axpy(&z, h / 2.0, &k1)).map_err(fail)?;
        let k3 = sys.eval(&axpy(&z, h / 2.0, &k2)).map_err(fail)?;
        let k4 = sys.eval(&axpy(&z, h, &k3)).map_err(fail)?;
        for (i, zi) in z.iter_mut().enumerate() {
            *zi += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        done += h;
        if z.iter().any(|x| !x.is_finite()) {
            return Err(FlowError::Domain { s: done, source: EvalError::NonFinite });
        }
    }
    Ok(JetPoint::from_slice(&z))
}

/// One closed-form expression per jet coordinate, in `(t, x, p, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowVariant {
    pub label: String,
    pub corrected: bool,
    pub map: Vec<Expr>,
}

impl FlowVariant {
    pub fn apply(&self, z: &JetPoint, s: f64) -> Result<JetPoint, EvalError> {
        let flat = z.to_vec();
        let env = SlotBindings { n: z.dim(), z: &flat, s: Some(s) };
        let out = self.map.iter().map(|e| e.evaluate(&env)).collect::<Result<Vec<_>, _>>()?;
        Ok(JetPoint::from_slice(&out))
    }

    /// `map|_{s=0} − id`, one residual per coordinate.
    pub fn identity_residuals(&self, n: usize) -> Vec<(Var, Expr)> {
        Var::jet_coords(n)
            .into_iter()
            .zip(&self.map)
            .map(|(v, e)| {
                let at0 = e.substitute(&|w| (w == Var::S).then(Expr::zero));
                (v, (at0 - Expr::Var(v)).normalize())
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowSource {
    Example(ExampleId),
    /// No closed form; only [`integrate_flow`] applies.
    NumericField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    pub source: FlowSource,
    pub n: usize,
    /// Printed formula first, then a corrected variant where one differs.
    pub variants: Vec<FlowVariant>,
}

impl FlowMap {
    pub fn printed(&self) -> Option<&FlowVariant> {
        self.variants.iter().find(|v| !v.corrected)
    }

    pub fn corrected(&self) -> Option<&FlowVariant> {
        self.variants.iter().find(|v| v.corrected)
    }
}

fn lin(sys: &SystemRhs, i: usize, j: usize) -> Expr {
    Expr::from_poly(&sys.linear_form(i, j))
}

fn konst(q: Rational) -> Expr {
    Expr::Const(q)
}

/// Displayed one-parameter group of an example, and the exact flow of its
/// generator when the two differ.
pub fn closed_form_flow(ex: &ExampleId, sys: &SystemRhs) -> Result<FlowMap, ContactError> {
    let n = sys.dim();
    ex.validate(n)?;
    let s = Expr::s;
    let a = |m: usize, j: usize, k: usize| sys.tensor().get(m, j, k).clone();
    let xs = |shift: &dyn Fn(usize) -> Expr| (1..=n).map(shift).collect::<Vec<_>>();
    let (printed, exact): (Vec<Expr>, Option<Vec<Expr>>) = match ex {
        ExampleId::E33 => {
            let mut m = vec![Expr::t() + s()];
            m.extend((1..=n).map(Expr::x));
            m.extend((1..=n).map(Expr::p));
            (m, None)
        }
        ExampleId::E34 { i } | ExampleId::E35 { i } => {
            let i = *i;
            let t_new = match ex {
                ExampleId::E34 { .. } => Expr::t() + s(),
                _ => Expr::t() * Expr::exp(s()),
            };
            let mut m = vec![t_new];
            m.extend(xs(&|j| if j == i { Expr::x(j) + s() } else { Expr::x(j) }));
            m.extend(
                (1..=n)
                    .map(|mm| Expr::sum([Expr::p(mm), konst(a(mm, i, i)) * Expr::pow(s(), 2), s() * lin(sys, mm, i)])),
            );
            (m, None)
        }
        ExampleId::E36 { c } => {
            let head = |quad: &dyn Fn(usize) -> Rational| {
                let mut m = vec![Expr::t() * Expr::exp(s().scale(c))];
                m.extend(xs(&|j| Expr::x(j) + s()));
                m.extend((1..=n).map(|mm| {
                    Expr::sum([
                        Expr::p(mm),
                        konst(quad(mm)) * Expr::pow(s(), 2),
                        s() * Expr::sum((1..=n).map(|l| lin(sys, mm, l))),
                    ])
                }));
                m
            };
            let diag = |mm: usize| (1..=n).map(|l| a(mm, l, l)).fold(Rational::zero(), |x, y| x + y);
            let full = |mm: usize| {
                (1..=n)
                    .flat_map(|j| (1..=n).map(move |k| (j, k)))
                    .map(|(j, k)| a(mm, j, k))
                    .fold(Rational::zero(), |x, y| x + y)
            };
            (head(&diag), Some(head(&full)))
        }
        ExampleId::E37 => {
            let grow = Expr::exp(s().scale(&Rational::from_integer(2.into()))) - Expr::one();
            let head = || {
                let mut m = vec![Expr::t()];
                m.extend(xs(&|j| Expr::exp(s()) * Expr::x(j)));
                m
            };
            let mut printed = head();
            printed.extend((1..=n).map(|i| {
                let bxx = Expr::sum((1..=n).map(|j| Expr::x(j) * lin(sys, i, j)));
                Expr::p(i) + &grow * &bxx
            }));
            let mut exact = head();
            exact.extend((1..=n).map(|i| Expr::p(i) + &grow * &sys.f_expr(i)));
            (printed, Some(exact))
        }
        ExampleId::E38 => {
            let mut m = vec![Expr::t()];
            m.extend(xs(&|j| Expr::x(j) + Expr::p(j) * s()));
            m.extend((1..=n).map(|i| {
                let l = lin(sys, i, i);
                let num = Expr::sum((1..=n).map(|j| Expr::p(j) * lin(sys, i, j)));
                Expr::p(i) + (Expr::exp(&l * &s()) - Expr::one()) * num * Expr::recip(l)
            }));
            (m, None)
        }
    };
    let norm = |m: Vec<Expr>| m.iter().map(Expr::normalize).collect::<Vec<_>>();
    let printed = norm(printed);
    let mut variants = vec![FlowVariant { label: "printed".into(), corrected: false, map: printed.clone() }];
    if let Some(exact) = exact.map(norm) {
        let cfg = ZeroTestConfig::default();
        let differs = printed.iter().zip(&exact).any(|(a, b)| !is_zero(&(a - b), &cfg).is_zero());
        if differs {
            variants.push(FlowVariant { label: "corrected".into(), corrected: true, map: exact });
        }
    }
    Ok(FlowMap { source: FlowSource::Example(ex.clone()), n, variants })
}

/// Seeds, parameter grid, tolerance and RK4 step for numeric checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericOptions {
    pub seeds: Vec<u64>,
    pub s_grid: Vec<f64>,
    pub tol: f64,
    pub step: f64,
}

impl NumericOptions {
    /// Ten seeds from `seed`, `s ∈ {0, 0.1, …, 1}`.
    pub fn standard(seed: u64, tol: f64, step: f64) -> Self {
        NumericOptions {
            seeds: (seed..seed + 10).collect(),
            s_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            tol,
            step,
        }
    }
}

/// Accumulates the worst error and domain failures over samples.
#[derive(Default)]
pub(crate) struct Tally {
    max_error: f64,
    worst: Option<Sample>,
    samples: usize,
    domain_errors: usize,
    first_domain_error: Option<String>,
}

impl Tally {
    pub(crate) fn record(&mut self, seed: u64, s: f64, z0: &JetPoint, err: Result<f64, String>) {
        match err {
            Ok(e) => {
                let e = if e.is_nan() { f64::INFINITY } else { e };
                self.samples += 1;
                if self.worst.is_none() || e > self.max_error {
                    self.max_error = e;
                    self.worst = Some(Sample { seed, s, z0: z0.to_vec(), error: e });
                }
            }
            Err(msg) => {
                self.domain_errors += 1;
                self.first_domain_error.get_or_insert_with(|| format!("seed {seed}, s = {s}: {msg}"));
            }
        }
    }

    pub(crate) fn finish(self, opts: &NumericOptions, tolerance: f64) -> NumericCheck {
        NumericCheck {
            // Infinite errors are clamped so the report stays valid JSON.
            max_error: if self.max_error.is_finite() { self.max_error } else { f64::MAX },
            tolerance,
            samples: self.samples,
            domain_errors: self.domain_errors,
            worst: self.worst.map(|mut w| {
                if !w.error.is_finite() {
                    w.error = f64::MAX;
                }
                w
            }),
            seeds: opts.seeds.clone(),
            s_grid: opts.s_grid.clone(),
            step: opts.step,
            first_domain_error: self.first_domain_error,
        }
    }
}

pub(crate) fn diff(a: &JetPoint, b: &JetPoint) -> f64 {
    a.to_vec().iter().zip(b.to_vec()).map(|(x, y)| (x - y).abs()).fold(0.0, |m, d| {
        if d.is_nan() {
            f64::INFINITY
        } else {
            m.max(d)
        }
    })
}

/// `max |closed_form − integrate_flow|` over the seeds and grid.
pub fn cross_check_numeric(v: &VectorField, variant: &FlowVariant, opts: &NumericOptions) -> NumericCheck {
    let n = v.dim();
    let per_seed: Vec<Vec<(f64, Result<f64, String>)>> = par::map(&opts.seeds, |&seed| {
        let z0 = seeded_point(seed, n);
        opts.s_grid
            .iter()
            .map(|&s| {
                let closed = variant.apply(&z0, s).map_err(|e| e.to_string());
                let numeric = integrate_flow(v, &z0, s, opts.step).map_err(|e| e.to_string());
                (s, closed.and_then(|c| numeric.map(|z| diff(&c, &z))))
            })
            .collect()
    });
    let mut tally = Tally::default();
    for (&seed, rows) in opts.seeds.iter().zip(per_seed) {
        let z0 = seeded_point(seed, n);
        for (s, r) in rows {
            tally.record(seed, s, &z0, r);
        }
    }
    tally.finish(opts, opts.tol)
}

/// `|flow_{s+u}(z) − flow_s(flow_u(z))|` over grid pairs.
pub fn group_law_numeric(variant: &FlowVariant, n: usize, opts: &NumericOptions, tol: f64) -> NumericCheck {
    let mut tally = Tally::default();
    for &seed in &opts.seeds {
        let z0 = seeded_point(seed, n);
        for &s in &opts.s_grid {
            for &u in &opts.s_grid {
                let r = variant
                    .apply(&z0, s + u)
                    .and_then(|direct| variant.apply(&variant.apply(&z0, u)?, s).map(|comp| diff(&direct, &comp)))
                    .map_err(|e| format!("u = {u}: {e}"));
                tally.record(seed, s, &z0, r);
            }
        }
    }
    tally.finish(opts, tol)
}

/// Result of checking one flow variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowCheck {
    pub example: ExampleId,
    pub variant: String,
    pub corrected: bool,
    /// Symbolic part: identity at `s = 0`; numeric part: RK4 comparison.
    pub report: VerificationReport,
    /// Only computed for variants whose comparison passes.
    pub group_law: Option<NumericCheck>,
}

pub fn flow_cross_check(
    ex: &ExampleId,
    sys: &SystemRhs,
    opts: &NumericOptions,
    cfg: &ZeroTestConfig,
) -> Result<Vec<FlowCheck>, ContactError> {
    assert!(opts.tol > 0.0, "tolerance must be positive");
    let v = example_generator(sys, ex)?;
    let flow = closed_form_flow(ex, sys)?;
    Ok(flow
        .variants
        .iter()
        .map(|variant| {
            let symbolic = variant
                .identity_residuals(sys.dim())
                .into_iter()
                .map(|(var, r)| SymbolicCheck {
                    label: format!("{var}(s=0) - {var}"),
                    residual: r.to_string(),
                    result: is_zero(&r, cfg),
                })
                .collect();
            let numeric = cross_check_numeric(&v, variant, opts);
            let mut report =
                VerificationReport::new(format!("flow {ex} ({})", variant.label), symbolic, Some(numeric), *cfg);
            let group_law =
                (report.verdict == Verdict::Pass).then(|| group_law_numeric(variant, sys.dim(), opts, opts.tol));
            if let Some(g) = &group_law {
                if g.verdict() != Verdict::Pass {
                    report.verdict = g.verdict();
                    report.notes.push(format!("group law defect {:e}", g.max_error));
                }
            }
            FlowCheck {
                example: ex.clone(),
                variant: variant.label.clone(),
                corrected: variant.corrected,
                report,
                group_law,
            }
        })
        .collect())
}

/// `err(step) / err(step / 2)` of RK4 against a closed form.
pub fn convergence_factor(v: &VectorField, variant: &FlowVariant, opts: &NumericOptions) -> f64 {
    let coarse = cross_check_numeric(v, variant, opts).max_error;
    let fine = cross_check_numeric(v, variant, &NumericOptions { step: opts.step / 2.0, ..opts.clone() }).max_error;
    coarse / fine
}
