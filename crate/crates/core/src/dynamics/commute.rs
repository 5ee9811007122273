use crate::algebra::{is_zero, Var, ZeroTest, ZeroTestConfig};
use crate::fields::{lie_bracket, FieldError, VectorField};
use crate::jet::JetPoint;
use crate::par;
use crate::report::{SymbolicCheck, Verdict, VerificationReport};
use crate::sample::seeded_point;

use super::flow::{diff, integrate_flow, NumericOptions, Tally};

/// Compares `φᵛ_s ∘ φʷ_s` with `φʷ_s ∘ φᵛ_s` at seeded points. A verdict is
/// only given when `[v, w]` is exactly zero; otherwise the defect is reported.
/// Uses the largest value of `opts.s_grid` as `s`.
pub fn commuting_flows_check(
    v: &VectorField,
    w: &VectorField,
    opts: &NumericOptions,
    cfg: &ZeroTestConfig,
) -> Result<VerificationReport, FieldError> {
    assert!(opts.tol > 0.0, "tolerance must be positive");
    let n = v.dim();
    let br = lie_bracket(v, w)?;
    let symbolic: Vec<SymbolicCheck> = br
        .components()
        .map(|(var, e)| SymbolicCheck {
            label: format!("[v,w] {}", component_name(var)),
            residual: e.to_string(),
            result: is_zero(e, cfg),
        })
        .collect();
    let exact = symbolic.iter().all(|c| c.result == ZeroTest::ExactZero);
    let s = opts.s_grid.iter().copied().fold(0.0, f64::max);
    let results = par::map(&opts.seeds, |&seed| {
        let z = seeded_point(seed, n);
        let run = || -> Result<f64, String> {
            let step = |f: &VectorField, z: &JetPoint| integrate_flow(f, z, s, opts.step).map_err(|e| e.to_string());
            let vw = step(v, &step(w, &z)?)?;
            let wv = step(w, &step(v, &z)?)?;
            Ok(diff(&vw, &wv))
        };
        (seed, z.clone(), run())
    });
    let mut tally = Tally::default();
    for (seed, z, r) in results {
        tally.record(seed, s, &z, r);
    }
    let numeric = tally.finish(&NumericOptions { s_grid: vec![s], ..opts.clone() }, opts.tol);
    let mut report = VerificationReport::new(format!("commuting flows of {v} and {w}"), symbolic, Some(numeric), *cfg);
    if !exact {
        report.verdict = Verdict::NoVerdict;
        report.notes.push("bracket not exactly zero; commutator defect reported without verdict".into());
    }
    Ok(report)
}

fn component_name(v: Var) -> String {
    format!("∂{v}")
}
