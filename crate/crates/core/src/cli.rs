//! Command-line front end.
//!
//! `run` is the whole program minus process exit, so it can be driven from
//! tests with in-memory writers.
//!
//! Exit codes: 0 success, 1 input error, 2 unstable, inadmissible or
//! unverified design, 3 infeasible or non-unique requirements, 4 not
//! factorable.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cascade::{factor_cascade, CascadeForm};
use crate::design::{design, DesignOptions, DesignOutcome};
use crate::error::Error;
use crate::model::{check_distinct_frequencies, Compensator, RequirementPair};
use crate::solver::{Classification, FeasibilityReport, SolverChoice, Tolerances};
use crate::verify::{bode_table, verify_design_with, CascadeOutcome, DesignReport, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_NOT_UNIQUE: i32 = 3;
pub const EXIT_NOT_FACTORABLE: i32 = 4;

pub const BODE_HEADER: &str = "omega,gain_linear,gain_db,phase_deg,re,im,flag";

#[derive(Debug, Parser)]
#[command(
    name = "laglead",
    version,
    about = "Design nth-order lag-lead compensators from frequency-response requirements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the compensator meeting the requirements in a spec file.
    Design(DesignArgs),
    /// Factor a compensator into first-order lead/lag sections.
    Factor(CoeffArgs),
    /// Frequency sweep as CSV.
    Bode(BodeArgs),
    /// Check a compensator against the requirements in a spec file.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverName {
    Cramer,
    Elimination,
    Auto,
}

impl From<SolverName> for SolverChoice {
    fn from(s: SolverName) -> Self {
        match s {
            SolverName::Cramer => SolverChoice::Cramer,
            SolverName::Elimination => SolverChoice::Elimination,
            SolverName::Auto => SolverChoice::Auto,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct DesignArgs {
    /// Requirement spec file (JSON).
    pub spec: PathBuf,
    /// Write the full result as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverName>,
    /// Verification tolerance on gain (relative) and phase (radians).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Show gains in dB.
    #[arg(long)]
    pub gain_db: bool,
    /// Also require a stable (minimum-phase) numerator.
    #[arg(long)]
    pub check_numerator: bool,
}

#[derive(Debug, clap::Args)]
pub struct CoeffArgs {
    /// Numerator coefficients b1..bn.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
    pub num: Vec<f64>,
    /// Denominator coefficients a1..an.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
    pub den: Vec<f64>,
}

#[derive(Debug, clap::Args)]
pub struct BodeArgs {
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long, default_value_t = 0.1)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    /// Requirement spec file (JSON).
    pub spec: PathBuf,
    /// Numerator coefficients b1..bn.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, requires = "den", conflicts_with = "design")]
    pub num: Option<Vec<f64>>,
    /// Denominator coefficients a1..an.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, requires = "num")]
    pub den: Option<Vec<f64>>,
    /// Result file written by `design --out`.
    #[arg(long, required_unless_present = "num")]
    pub design: Option<PathBuf>,
    /// Tolerance on gain (relative) and phase (radians).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Show gains in dB.
    #[arg(long)]
    pub gain_db: bool,
    /// Also require a stable numerator.
    #[arg(long)]
    pub check_numerator: bool,
}

/// Requirement spec file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpecFile {
    /// Defaults to the number of requirements.
    #[serde(default)]
    pub order: Option<usize>,
    pub requirements: Vec<RequirementEntry>,
    #[serde(default)]
    pub options: SpecOptions,
}

/// One requirement; exactly one gain field and one phase field.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementEntry {
    pub omega: f64,
    #[serde(default)]
    pub gain: Option<f64>,
    #[serde(default)]
    pub gain_db: Option<f64>,
    #[serde(default)]
    pub phase_deg: Option<f64>,
    #[serde(default)]
    pub phase_rad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecOptions {
    #[serde(default)]
    pub rank_tol: Option<f64>,
    #[serde(default)]
    pub residual_tol: Option<f64>,
    #[serde(default)]
    pub verify_tol: Option<f64>,
    #[serde(default)]
    pub check_numerator_stability: Option<bool>,
    #[serde(default)]
    pub solver: Option<SolverName>,
}

impl DesignSpecFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("spec file: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Validated requirements with gains linear and phases in radians.
    pub fn requirements(&self) -> Result<Vec<RequirementPair>, String> {
        let reqs = self
            .requirements
            .iter()
            .enumerate()
            .map(|(i, e)| {
                e.to_pair()
                    .map_err(|msg| format!("requirements[{i}]: {msg}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if reqs.is_empty() {
            return Err("requirements: at least one requirement is needed".to_string());
        }
        check_distinct_frequencies(&reqs).map_err(|e| format!("requirements: {e}"))?;
        Ok(reqs)
    }

    fn tolerances(&self) -> Result<Tolerances, String> {
        let mut tol = Tolerances::default();
        if let Some(v) = self.options.rank_tol {
            tol.rank = positive("options.rank_tol", v)?;
        }
        if let Some(v) = self.options.residual_tol {
            tol.residual = positive("options.residual_tol", v)?;
        }
        Ok(tol)
    }

    fn verify_options(
        &self,
        tol: Option<f64>,
        check_numerator: bool,
    ) -> Result<VerifyOptions, String> {
        let mut opts = VerifyOptions::default();
        if let Some(v) = self.options.verify_tol {
            opts.tolerance = positive("options.verify_tol", v)?;
        }
        if let Some(v) = tol {
            opts.tolerance = positive("--tol", v)?;
        }
        opts.check_numerator =
            check_numerator || self.options.check_numerator_stability.unwrap_or(false);
        Ok(opts)
    }
}

impl RequirementEntry {
    fn to_pair(&self) -> Result<RequirementPair, String> {
        let gain = match (self.gain, self.gain_db) {
            (Some(g), None) => g,
            (None, Some(db)) => 10f64.powf(db / 20.0),
            _ => return Err("exactly one of `gain` or `gain_db` is required".to_string()),
        };
        let phase = match (self.phase_deg, self.phase_rad) {
            (Some(d), None) => d.to_radians(),
            (None, Some(r)) => r,
            _ => return Err("exactly one of `phase_deg` or `phase_rad` is required".to_string()),
        };
        RequirementPair::new(self.omega, gain, phase).map_err(|e| e.to_string())
    }
}

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{name} must be finite and positive, got {v}"))
    }
}

/// Machine-readable result of `design`.
#[derive(Debug, Serialize)]
struct DesignFileOut<'a> {
    compensator: Option<&'a Compensator>,
    #[serde(flatten)]
    outcome: &'a DesignOutcome,
}

/// The part of a `design --out` file that `verify --design` reads.
#[derive(Debug, Deserialize)]
struct DesignFileIn {
    compensator: Option<Compensator>,
}

/// Run the program; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Design(a) => cmd_design(a, out),
        Command::Factor(a) => cmd_factor(a, out),
        Command::Bode(a) => cmd_bode(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

type CmdResult = Result<i32, String>;

fn io_err(e: io::Error) -> String {
    format!("write failed: {e}")
}

fn cmd_design(args: &DesignArgs, out: &mut dyn Write) -> CmdResult {
    let spec = DesignSpecFile::load(&args.spec)?;
    let reqs = spec.requirements()?;
    let opts = DesignOptions {
        order: spec.order,
        solver: args
            .solver
            .or(spec.options.solver)
            .map_or(SolverChoice::Auto, SolverChoice::from),
        tolerances: spec.tolerances()?,
        verify: spec.verify_options(args.tol, args.check_numerator)?,
    };
    let outcome = match design(&reqs, &opts) {
        Ok(o) => o,
        Err(e @ (Error::ResidualTooLarge { .. } | Error::SingularSystem { .. })) => {
            writeln!(out, "solve failed: {e}").map_err(io_err)?;
            return Ok(EXIT_NOT_UNIQUE);
        }
        Err(e) => return Err(e.to_string()),
    };

    let mut text = String::new();
    write_feasibility(&mut text, &outcome.feasibility);
    let code = match (&outcome.solution, &outcome.report) {
        (Some(sol), Some(report)) => {
            let _ = writeln!(
                text,
                "method: {} (residual {:e})",
                sol.method, sol.residual_norm
            );
            write_coefficients(&mut text, &sol.compensator);
            for w in &sol.admissibility_warnings {
                let _ = writeln!(text, "warning: {w}");
            }
            write_report(&mut text, report, args.gain_db);
            if report.admissible() {
                EXIT_OK
            } else {
                EXIT_INADMISSIBLE
            }
        }
        _ => EXIT_NOT_UNIQUE,
    };
    out.write_all(text.as_bytes()).map_err(io_err)?;

    if let Some(path) = &args.out {
        let file = DesignFileOut {
            compensator: outcome.solution.as_ref().map(|s| &s.compensator),
            outcome: &outcome,
        };
        let json = serde_json::to_string_pretty(&file).map_err(|e| e.to_string())?;
        fs::write(path, json + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(code)
}

fn cmd_factor(args: &CoeffArgs, out: &mut dyn Write) -> CmdResult {
    let comp = compensator(&args.num, &args.den)?;
    match factor_cascade(&comp) {
        Ok(cascade) => {
            let mut text = String::new();
            write_cascade(&mut text, &cascade);
            out.write_all(text.as_bytes()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Err(e @ Error::NotFactorable { .. }) => {
            writeln!(out, "{e}").map_err(io_err)?;
            Ok(EXIT_NOT_FACTORABLE)
        }
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_bode(args: &BodeArgs, out: &mut dyn Write) -> CmdResult {
    let comp = compensator(&args.coeffs.num, &args.coeffs.den)?;
    let rows = bode_table(&comp, args.omega_min, args.omega_max, args.points)
        .map_err(|e| e.to_string())?;
    let mut csv = String::new();
    csv.push_str(BODE_HEADER);
    csv.push('\n');
    for r in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_num(r.omega),
            fmt_num(r.gain_linear),
            fmt_num(r.gain_db),
            fmt_num(r.phase_deg),
            fmt_num(r.re),
            fmt_num(r.im),
            u8::from(r.flag)
        );
    }
    match &args.out {
        Some(path) => fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?,
        None => out.write_all(csv.as_bytes()).map_err(io_err)?,
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let spec = DesignSpecFile::load(&args.spec)?;
    let reqs = spec.requirements()?;
    let comp = match (&args.num, &args.den, &args.design) {
        (Some(num), Some(den), _) => compensator(num, den)?,
        (_, _, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let file: DesignFileIn =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            file.compensator.ok_or_else(|| {
                format!("{}: no compensator (design was not unique)", path.display())
            })?
        }
        _ => return Err("give --num and --den, or --design".to_string()),
    };
    let opts = spec.verify_options(args.tol, args.check_numerator)?;
    let report = verify_design_with(&comp, &reqs, &opts).map_err(|e| e.to_string())?;
    let mut text = String::new();
    let _ = writeln!(text, "numerator:   {}", comp.numerator());
    let _ = writeln!(text, "denominator: {}", comp.denominator());
    write_requirements(&mut text, &report, args.gain_db);
    let met = report.requirements_met();
    let _ = writeln!(
        text,
        "{}",
        if met {
            "all requirements met"
        } else {
            "requirements NOT met"
        }
    );
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(if met { EXIT_OK } else { EXIT_INADMISSIBLE })
}

fn compensator(num: &[f64], den: &[f64]) -> Result<Compensator, String> {
    if num.len() != den.len() {
        return Err(format!(
            "--num has {} coefficients but --den has {}",
            num.len(),
            den.len()
        ));
    }
    Compensator::from_coeffs(num, den).map_err(|e| e.to_string())
}

/// Shortest round-trip decimal; exponent form outside a readable range.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_feasibility(text: &mut String, f: &FeasibilityReport) {
    let _ = write!(
        text,
        "feasibility: {} (r = {}, n = {}, rank = {} of {}, {}",
        f.classification,
        f.r,
        f.n,
        f.rank,
        2 * f.n,
        if f.consistent {
            "consistent"
        } else {
            "inconsistent"
        }
    );
    if let Some(c) = f.condition_estimate {
        let _ = write!(text, ", condition ~ {c:.3e}");
    }
    text.push_str(")\n");
    if f.classification != Classification::Unique {
        let _ = writeln!(
            text,
            "no unique compensator; adjust the requirement count or order"
        );
    }
}

fn write_coefficients(text: &mut String, comp: &Compensator) {
    let _ = writeln!(text, "numerator:   {}", comp.numerator());
    let _ = writeln!(text, "denominator: {}", comp.denominator());
    for (i, b) in comp.numerator().coeffs().iter().enumerate() {
        let _ = writeln!(text, "b{} = {}", i + 1, fmt_num(*b));
    }
    for (i, a) in comp.denominator().coeffs().iter().enumerate() {
        let _ = writeln!(text, "a{} = {}", i + 1, fmt_num(*a));
    }
}

fn write_report(text: &mut String, report: &DesignReport, gain_db: bool) {
    write_requirements(text, report, gain_db);
    let _ = writeln!(
        text,
        "denominator stability: {} ({} sign changes{}{})",
        report.routh.verdict,
        report.routh.sign_changes,
        if report.routh.epsilon_used {
            ", epsilon substituted"
        } else {
            ""
        },
        if report.routh.auxiliary_used {
            ", auxiliary polynomial used"
        } else {
            ""
        },
    );
    if let Some(num) = &report.numerator_routh {
        let _ = writeln!(
            text,
            "numerator stability: {} ({} sign changes)",
            num.verdict, num.sign_changes
        );
    }
    if !report.positivity_ok {
        let _ = writeln!(text, "warning: negative coefficients present");
    }
    match &report.cascade {
        CascadeOutcome::Factored(c) => {
            let _ = writeln!(text, "cascade:");
            write_cascade(text, c);
        }
        CascadeOutcome::NotFactorable { role, roots } => {
            let e = Error::NotFactorable {
                role: *role,
                roots: roots.clone(),
            };
            let _ = writeln!(text, "cascade: {e}");
        }
    }
}

fn write_requirements(text: &mut String, report: &DesignReport, gain_db: bool) {
    let unit = if gain_db { "dB" } else { "linear" };
    let _ = writeln!(
        text,
        "requirements (gain {unit}, phase deg, tolerance {}):",
        fmt_num(report.tolerance)
    );
    for c in &report.per_requirement {
        let g = |v: f64| if gain_db { 20.0 * v.log10() } else { v };
        let _ = writeln!(
            text,
            "  omega {}: gain {} -> {} (rel err {:.3e}), phase {} -> {} (err {:.3e} rad) {}",
            fmt_num(c.omega),
            fmt_num(g(c.target_gain)),
            fmt_num(g(c.achieved_gain)),
            c.gain_rel_err,
            fmt_num(c.target_phase.to_degrees()),
            fmt_num(c.achieved_phase.to_degrees()),
            c.phase_abs_err,
            if c.within(report.tolerance) {
                "ok"
            } else {
                "FAIL"
            }
        );
    }
}

fn write_cascade(text: &mut String, cascade: &CascadeForm) {
    for s in cascade.sections() {
        let _ = writeln!(text, "  {s}  {}", s.kind());
    }
}
