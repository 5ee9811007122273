//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a `contact` verification fails, 2 on
//! input errors.

mod input;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};

use crate::algebra::{parse_rational, Rational, ZeroTestConfig};
use crate::contact::{build_contact_field, split_generators, ContactError, ContactSpec, ExampleId};
use crate::determining::{invariants_of_point_basis, solve_point_symmetries, Mode, PointInvariants};
use crate::dynamics::{flow_cross_check, invariant_catalog, verify_invariants, Catalog, CatalogQuery, NumericOptions};
use crate::fields::{structure_table, TableEntry, VectorField};
use crate::jet::{build_system, SystemRhs};

pub use input::{parse_system, parse_system_str, InputError, TensorEcho, TensorEntry};
pub use output::{
    BasisReport, CommandResult, InvariantReport, ModeChoice, Report, RunConfig, Summary, TableCell, TableReport,
};

#[derive(Debug, Parser)]
#[command(name = "qhds", version, about = "Point and contact symmetries of quadratic homogeneous ODE systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the determining equations for polynomial point symmetries.
    Point {
        system: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Build a contact generator and verify it, its flow and its invariants.
    Contact {
        system: PathBuf,
        #[command(flatten)]
        gen: GeneratorArgs,
        /// Check the symmetry condition (default when no other check is requested).
        #[arg(long)]
        verify: bool,
        /// Compare closed-form flows with RK4.
        #[arg(long)]
        flow: bool,
        /// Verify the catalogued invariants.
        #[arg(long)]
        invariants: bool,
        /// Further generators `"T=<expr>;K=<expr>,..."` for a commutator table.
        #[arg(long = "with", value_name = "GEN")]
        with: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Commutator table of a list of contact generators.
    Table {
        system: PathBuf,
        /// Generator `"T=<expr>;K=<expr>,..."`, repeatable.
        #[arg(long = "gen", value_name = "GEN")]
        gens: Vec<String>,
        /// Use the split `T ∂t, K₁(∂x₁ + …), …` of the generator given by --T/--K.
        #[arg(long)]
        split: bool,
        #[arg(long = "T", value_name = "EXPR")]
        t: Option<String>,
        #[arg(long = "K", value_name = "EXPR")]
        k: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct GeneratorArgs {
    /// Worked example: 3.3 to 3.8.
    #[arg(long, conflicts_with_all = ["t", "k"])]
    pub example: Option<String>,
    /// Index for 3.4 and 3.5.
    #[arg(long)]
    pub i: Option<usize>,
    /// Constant for 3.6.
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long = "T", value_name = "EXPR")]
    pub t: Option<String>,
    /// One per dimension, in order.
    #[arg(long = "K", value_name = "EXPR")]
    pub k: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Strict,
    OnShell,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_flow: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_drift: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

impl Common {
    fn config(&self) -> Result<RunConfig, String> {
        for (name, v) in [("--tol-flow", self.tol_flow), ("--tol-drift", self.tol_drift), ("--step", self.step)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.trials == 0 {
            return Err("--trials must be positive".into());
        }
        let mode = match self.mode {
            ModeArg::Strict => ModeChoice::Strict,
            ModeArg::OnShell => ModeChoice::OnShell,
            ModeArg::Both => ModeChoice::Both,
        };
        Ok(RunConfig {
            mode,
            degree: self.degree,
            tol_flow: self.tol_flow,
            tol_drift: self.tol_drift,
            step: self.step,
            seed: self.seed,
            trials: self.trials,
        })
    }
}

impl RunConfig {
    pub fn zero_test(&self) -> ZeroTestConfig {
        ZeroTestConfig { trials: self.trials, tol: 1e-9, seed: self.seed }
    }

    pub fn flow_options(&self) -> NumericOptions {
        NumericOptions::standard(self.seed, self.tol_flow, self.step)
    }

    pub fn drift_options(&self) -> NumericOptions {
        NumericOptions::standard(self.seed, self.tol_drift, self.step)
    }
}

/// Parses arguments, runs the command, prints and writes reports.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let common = match &cli.command {
        Command::Point { common, .. } | Command::Contact { common, .. } | Command::Table { common, .. } => common,
    };
    match execute(&cli.command) {
        Ok(report) => {
            if common.format == Format::Json {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            if let Some(path) = &common.out {
                if let Err(e) = std::fs::write(path, report.to_json()) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            report.exit_code()
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

/// Runs a parsed command; `Err` carries an input error message.
pub fn execute(command: &Command) -> Result<Report, String> {
    match command {
        Command::Point { system, common } => {
            let config = common.config()?;
            let sys = load(system)?;
            Ok(Report::new(TensorEcho::of(sys.tensor()), config.clone(), cmd_point(&sys, &config)))
        }
        Command::Contact { system, gen, verify, flow, invariants, with, common } => {
            let config = common.config()?;
            let sys = load(system)?;
            let (spec, example) = generator(&sys, gen)?;
            let extra = with
                .iter()
                .map(|g| ContactSpec::parse_generator(g).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            let checks = Checks { verify: *verify || !(*flow || *invariants), flow: *flow, invariants: *invariants };
            let result =
                cmd_contact(&sys, &spec, example.as_ref(), &extra, checks, &config).map_err(|e| e.to_string())?;
            Ok(Report::new(TensorEcho::of(sys.tensor()), config, result))
        }
        Command::Table { system, gens, split, t, k, common } => {
            let config = common.config()?;
            let sys = load(system)?;
            let specs = if *split {
                let t = t.as_deref().ok_or("--split needs --T and --K")?;
                vec![ContactSpec::parse(t, k).map_err(|e| e.to_string())?]
            } else {
                gens.iter()
                    .map(|g| ContactSpec::parse_generator(g).map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?
            };
            let result = cmd_table(&sys, &specs, *split, &config).map_err(|e| e.to_string())?;
            Ok(Report::new(TensorEcho::of(sys.tensor()), config, result))
        }
    }
}

fn load(path: &std::path::Path) -> Result<SystemRhs, String> {
    let tensor = parse_system(path).map_err(|e| e.to_string())?;
    build_system(tensor).map_err(|e| e.to_string())
}

fn generator(sys: &SystemRhs, g: &GeneratorArgs) -> Result<(ContactSpec, Option<ExampleId>), String> {
    if let Some(id) = &g.example {
        let c = g.c.as_deref().map(parse_rational).transpose().map_err(|e| format!("--c: {e}"))?;
        let ex = ExampleId::from_parts(id, g.i, c).map_err(|e| e.to_string())?;
        let spec = ex.spec(sys.dim()).map_err(|e| e.to_string())?;
        return Ok((spec, Some(ex)));
    }
    let t = g.t.as_deref().ok_or("give --example or --T with one --K per dimension")?;
    if g.k.len() != sys.dim() {
        return Err(format!("expected {} --K values, got {}", sys.dim(), g.k.len()));
    }
    Ok((ContactSpec::parse(t, &g.k).map_err(|e| e.to_string())?, None))
}

fn modes(choice: ModeChoice) -> Vec<Mode> {
    match choice {
        ModeChoice::Strict => vec![Mode::Strict],
        ModeChoice::OnShell => vec![Mode::OnShell],
        ModeChoice::Both => vec![Mode::Strict, Mode::OnShell],
    }
}

pub fn cmd_point(sys: &SystemRhs, config: &RunConfig) -> CommandResult {
    let bases = modes(config.mode)
        .into_iter()
        .map(|mode| {
            let basis = solve_point_symmetries(sys, config.degree, mode);
            let first_integrals = match invariants_of_point_basis(&basis) {
                PointInvariants::Invariants(list) => Some(list.iter().map(ToString::to_string).collect()),
                PointInvariants::Unsupported => None,
            };
            BasisReport {
                mode: mode.to_string(),
                degree: config.degree,
                dimension: basis.dim(),
                fields: basis.fields.iter().map(ToString::to_string).collect(),
                coefficients: (0..basis.dim())
                    .map(|b| basis.coefficient_map(b).into_iter().map(|(k, v)| (k, v.to_string())).collect())
                    .collect(),
                first_integrals,
            }
        })
        .collect();
    CommandResult::Point { bases }
}

#[derive(Debug, Clone, Copy)]
pub struct Checks {
    pub verify: bool,
    pub flow: bool,
    pub invariants: bool,
}

pub fn cmd_contact(
    sys: &SystemRhs,
    spec: &ContactSpec,
    example: Option<&ExampleId>,
    extra: &[ContactSpec],
    checks: Checks,
    config: &RunConfig,
) -> Result<CommandResult, ContactError> {
    let cfg = config.zero_test();
    let v = build_contact_field(sys, spec)?;
    let mut notes = Vec::new();
    let symmetry = checks.verify.then(|| crate::contact::verify_contact_symmetry(sys, &v, &cfg));
    let mut flows = Vec::new();
    if checks.flow {
        match example {
            Some(ex) => flows = flow_cross_check(ex, sys, &config.flow_options(), &cfg)?,
            None => notes.push("no closed-form flow for a custom generator".to_string()),
        }
    }
    let mut invariants = Vec::new();
    if checks.invariants {
        let catalog = match example {
            Some(ex) => invariant_catalog(CatalogQuery::Example(ex), sys),
            None => invariant_catalog(CatalogQuery::Spec(spec), sys),
        };
        match catalog {
            Catalog::Invariants(list) => {
                let reports = verify_invariants(&v, &list, &config.drift_options(), &cfg);
                invariants = list
                    .iter()
                    .zip(reports)
                    .map(|(inv, report)| InvariantReport {
                        label: inv.label.clone(),
                        source: inv.source,
                        corrected: inv.corrected,
                        report,
                    })
                    .collect();
            }
            Catalog::Unsupported { reason } => notes.push(format!("invariants: {reason}")),
        }
    }
    let table = if extra.is_empty() {
        None
    } else {
        let mut gens = vec![v.clone()];
        for s in extra {
            gens.push(build_contact_field(sys, s)?);
        }
        Some(table_report(&gens, None, &cfg)?)
    };
    Ok(CommandResult::Contact {
        generator: v.to_string(),
        spec: spec.to_string(),
        example: example.map(ToString::to_string),
        symmetry,
        flows,
        invariants,
        table,
        notes,
    })
}

/// With `split`, the table of the split generators is annotated with the
/// printed claim `[gᵢ, gⱼ] = gⱼ − gᵢ`.
pub fn cmd_table(
    sys: &SystemRhs,
    specs: &[ContactSpec],
    split: bool,
    config: &RunConfig,
) -> Result<CommandResult, ContactError> {
    let cfg = config.zero_test();
    let gens = if split {
        split_generators(sys, &specs[0])?
    } else {
        specs.iter().map(|s| build_contact_field(sys, s)).collect::<Result<Vec<_>, _>>()?
    };
    let claim = split.then_some(printed_claim as fn(usize, usize, usize) -> Vec<Rational>);
    Ok(CommandResult::Table { table: table_report(&gens, claim, &cfg)? })
}

fn printed_claim(m: usize, i: usize, j: usize) -> Vec<Rational> {
    let mut c = vec![Rational::zero(); m];
    if i != j {
        c[j] += Rational::one();
        c[i] -= Rational::one();
    }
    c
}

/// Printed expansion of `[g_i, g_j]` over `m` generators.
type ClaimFn = fn(usize, usize, usize) -> Vec<Rational>;

fn table_report(
    gens: &[VectorField],
    claim: Option<ClaimFn>,
    cfg: &ZeroTestConfig,
) -> Result<TableReport, ContactError> {
    let m = gens.len();
    let table = structure_table(gens, cfg)?;
    let mut cells = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let (expansion, exact) = match &table.entries[i][j] {
                TableEntry::Expansion { coeffs, exact } => (Some(coeffs.clone()), *exact),
                TableEntry::NotInSpan { .. } => (None, false),
            };
            let printed = claim.map(|f| f(m, i, j));
            cells.push(TableCell {
                i: i + 1,
                j: j + 1,
                bracket: table.brackets[i][j].to_string(),
                claim_holds: printed.as_ref().map(|p| expansion.as_ref() == Some(p)),
                claim: printed.map(|_| if i == j { "0".to_string() } else { format!("g{} - g{}", j + 1, i + 1) }),
                expansion,
                exact,
            });
        }
    }
    Ok(TableReport { generators: gens.iter().map(ToString::to_string).collect(), cells })
}
