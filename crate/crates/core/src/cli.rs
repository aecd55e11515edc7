//! Batch command-line surface. Every command prints one JSON document with
//! sorted keys; exit codes are 0 for success, 1 for a verified failure or an
//! inconsistent probe and 2 for usage, parse or configuration errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigDoc, ConfigError, FamilyKind};
use crate::corpus::{builtin, load_dir, run_entry, CorpusOutcome};
use crate::families::{
    all_pass, classify, solve_admissible_ab, validate_quadratic, validate_sine, validate_single_quadratic, validate_single_sine,
    ConstraintCheck,
};
use crate::parser::{parse_scalar, print_expr};
use crate::scalar::Scalar;
use crate::search::{minimize, nonexistence_probe, AnsatzSpec};
use crate::verify::{NumericOptions, Verifier, DEFAULT_RADIUS, DEFAULT_SAMPLES, NUMERIC_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "FERMAT_SEED";

#[derive(Debug, Parser)]
#[command(name = "fermat", version, about = "Verify, build, classify and probe Fermat-type differential-difference systems")]
pub struct Cli {
    /// Seed for numeric sampling and search restarts.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a candidate pair against the system in a spec file.
    Verify(VerifyArgs),
    /// Validate a family spec, build its pair and verify it.
    Family(SpecArg),
    /// Classify an exponent quadruple.
    Classify(ClassifyArgs),
    /// List the sign pairs (A, B) meeting the exponential conditions.
    SolveAb(SpecArg),
    /// Residual minimization over an ansatz, or a probe with controls.
    Search(SearchArgs),
    /// Run the golden corpus.
    Examples(ExamplesArgs),
}

#[derive(Debug, Args)]
pub struct SpecArg {
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// First component as an expression.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "f1_file", required_unless_present = "f1_file")]
    pub f1: Option<String>,
    #[arg(long)]
    pub f1_file: Option<PathBuf>,
    /// Second component as an expression.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "f2_file", required_unless_present = "f2_file")]
    pub f2: Option<String>,
    #[arg(long)]
    pub f2_file: Option<PathBuf>,
    /// Numeric tolerance; only tightening below the default is accepted.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: f64,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(value_parser = clap::value_parser!(u32).range(1..))]
    pub n1: u32,
    #[arg(value_parser = clap::value_parser!(u32).range(1..))]
    pub m1: u32,
    #[arg(value_parser = clap::value_parser!(u32).range(1..))]
    pub n2: u32,
    #[arg(value_parser = clap::value_parser!(u32).range(1..))]
    pub m2: u32,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Run the non-existence probe with its solvable control over the ladder.
    #[arg(long)]
    pub probe: bool,
    #[arg(long, default_value_t = 1)]
    pub degree: u32,
    #[arg(long, default_value_t = 1)]
    pub bound: u32,
    /// Overrides the spec's `search.restarts`.
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    /// Corpus directory; the built-in corpus when absent.
    #[arg(long)]
    pub dir: Option<PathBuf>,
    /// Print the array of verification reports.
    #[arg(long)]
    pub json: bool,
}

/// A failure that maps to an exit code and a diagnostic.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

impl CliFailure {
    fn usage(message: impl Into<String>) -> Self {
        CliFailure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for CliFailure {
    fn from(e: ConfigError) -> Self {
        CliFailure::usage(e.to_string())
    }
}

/// Result of one command: the JSON document and the exit code.
pub struct Outcome {
    pub code: i32,
    pub json: serde_json::Value,
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    // going through Value sorts object keys
    serde_json::to_value(v).expect("reports serialize")
}

fn read(path: &Path) -> Result<String, CliFailure> {
    fs::read_to_string(path).map_err(|e| CliFailure::usage(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<ConfigDoc, CliFailure> {
    ConfigDoc::from_toml(&read(path)?).map_err(|e| CliFailure::usage(format!("{}: {e}", path.display())))
}

fn expr_text(inline: &Option<String>, file: &Option<PathBuf>) -> Result<String, CliFailure> {
    match (inline, file) {
        (Some(t), _) => Ok(t.clone()),
        (None, Some(p)) => Ok(read(p)?.trim().to_string()),
        (None, None) => Err(CliFailure::usage("expression missing")),
    }
}

fn cmd_verify(args: &VerifyArgs, seed: u64) -> Result<Outcome, CliFailure> {
    let doc = load_spec(&args.spec)?;
    let registry = doc.registry()?;
    let system = doc.system()?;
    let f1 = doc.expr("f1", &expr_text(&args.f1, &args.f1_file)?, &registry)?;
    let f2 = doc.expr("f2", &expr_text(&args.f2, &args.f2_file)?, &registry)?;
    let tolerance = args.tolerance.unwrap_or(NUMERIC_TOLERANCE);
    if !(tolerance > 0.0 && tolerance <= NUMERIC_TOLERANCE) {
        return Err(CliFailure::usage(format!("tolerance must be in (0, {NUMERIC_TOLERANCE}]")));
    }
    let options = NumericOptions {
        radius: args.radius,
        samples: args.samples,
        seed,
        tolerance,
    };
    let report = Verifier::new(registry)
        .with_options(options)
        .verify_system(&system, &f1, &f2)
        .map_err(|e| CliFailure::usage(e.to_string()))?;
    Ok(Outcome {
        code: if report.passed() { EXIT_OK } else { EXIT_FAILED },
        json: to_value(&report),
    })
}

fn cmd_family(args: &SpecArg) -> Result<Outcome, CliFailure> {
    let doc = load_spec(&args.spec)?;
    let registry = doc.registry()?;
    let checks: Vec<ConstraintCheck> = match doc.family {
        Some(FamilyKind::Sine) => validate_sine(&doc.sine_spec()?),
        Some(FamilyKind::Quadratic) => validate_quadratic(&doc.quadratic_spec(&registry)?),
        Some(FamilyKind::SingleSine) => validate_single_sine(&doc.single_sine_spec()?),
        Some(FamilyKind::SingleQuadratic) => {
            validate_single_quadratic(&doc.single_quadratic_spec(&registry)?)
        }
        None => return Err(CliFailure::usage("spec has no `family`")),
    };
    if !all_pass(&checks) {
        return Ok(Outcome {
            code: EXIT_FAILED,
            json: json!({ "checks": to_value(&checks), "valid": false }),
        });
    }
    let (f1, f2) = doc.build(&registry)?;
    let report = Verifier::new(registry)
        .verify_system(&doc.system()?, &f1, &f2)
        .map_err(|e| CliFailure::usage(e.to_string()))?;
    Ok(Outcome {
        code: if report.passed() { EXIT_OK } else { EXIT_FAILED },
        json: json!({
            "checks": to_value(&checks),
            "f1": print_expr(&f1),
            "f2": print_expr(&f2),
            "report": to_value(&report),
            "valid": true,
        }),
    })
}

fn cmd_classify(args: &ClassifyArgs) -> Outcome {
    Outcome {
        code: EXIT_OK,
        json: to_value(&classify(args.n1, args.m1, args.n2, args.m2)),
    }
}

fn cmd_solve_ab(args: &SpecArg) -> Result<Outcome, CliFailure> {
    let doc = load_spec(&args.spec)?;
    let variant = doc.variant.ok_or(ConfigError::Missing("variant"))?;
    let parse = |field: &str, v: &[String]| -> Result<Vec<Scalar>, CliFailure> {
        v.iter()
            .map(|t| {
                parse_scalar(t).map_err(|e| CliFailure::usage(format!("{field}: {}", e.render(t))))
            })
            .collect()
    };
    let pairs = solve_admissible_ab(
        doc.m,
        &parse("a_coeffs", &doc.a_coeffs)?,
        &parse("b_coeffs", &doc.b_coeffs)?,
        &doc.shift()?,
        variant,
    );
    Ok(Outcome {
        code: EXIT_OK,
        json: json!({ "pairs": pairs.iter().map(|(a, b)| json!({ "A": a, "B": b })).collect::<Vec<_>>() }),
    })
}

fn cmd_search(args: &SearchArgs, seed: u64) -> Result<Outcome, CliFailure> {
    let doc = load_spec(&args.spec)?;
    let mut opts = doc.probe_options();
    if doc.search.as_ref().and_then(|s| s.seed).is_none() {
        opts.seed = seed;
    }
    if let Some(r) = args.restarts {
        opts.restarts = r;
    }
    if args.probe {
        let report = nonexistence_probe(doc.exponents()?, &doc.shift()?, &opts).map_err(|e| CliFailure::usage(e.to_string()))?;
        return Ok(Outcome {
            code: if report.consistent { EXIT_OK } else { EXIT_FAILED },
            json: to_value(&report),
        });
    }
    let ansatz = AnsatzSpec::new(doc.m, args.degree, args.bound);
    let report = minimize(&doc.system()?, &ansatz, opts.restarts, opts.seed).map_err(|e| CliFailure::usage(e.to_string()))?;
    Ok(Outcome {
        code: EXIT_OK,
        json: to_value(&report),
    })
}

fn cmd_examples(args: &ExamplesArgs) -> Result<(Outcome, Vec<CorpusOutcome>), CliFailure> {
    let entries = match &args.dir {
        Some(d) => load_dir(d).map_err(|e| CliFailure::usage(e.to_string()))?,
        None => builtin(),
    };
    let outcomes: Vec<CorpusOutcome> = entries
        .iter()
        .map(|e| run_entry(e).map_err(|e| CliFailure::usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let all = outcomes.iter().all(CorpusOutcome::passed);
    let json = if args.json {
        to_value(&outcomes.iter().map(|o| &o.report).collect::<Vec<_>>())
    } else {
        to_value(&outcomes)
    };
    Ok((
        Outcome {
            code: if all { EXIT_OK } else { EXIT_FAILED },
            json,
        },
        outcomes,
    ))
}

/// Runs a parsed command, writing the JSON report to `out` and diagnostics
/// to `err`. Returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a, cli.seed),
        Command::Family(a) => cmd_family(a),
        Command::Classify(a) => Ok(cmd_classify(a)),
        Command::SolveAb(a) => cmd_solve_ab(a),
        Command::Search(a) => cmd_search(a, cli.seed),
        Command::Examples(a) => cmd_examples(a).map(|(o, outcomes)| {
            for failed in outcomes.iter().filter(|o| !o.passed()) {
                let _ = writeln!(err, "example {} failed", failed.name);
            }
            o
        }),
    };
    match result {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.json).expect("json renders");
            let _ = writeln!(out, "{text}");
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, format!("{text}\n")) {
                    let _ = writeln!(err, "{}: {e}", path.display());
                    return EXIT_USAGE;
                }
            }
            outcome.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Parses `args` (program name first) and runs; clap usage errors exit 2.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("fermat").chain(args.iter().copied()).map(Into::into);
        let code = main_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn classify_prints_branch() {
        let (code, out, _) = call(&["classify", "2", "2", "2", "1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["branch"], "2ii");
    }

    #[test]
    fn classify_rejects_zero() {
        assert_eq!(call(&["classify", "0", "2", "2", "1"]).0, 2);
    }

    #[test]
    fn examples_json_is_an_array_of_six() {
        let (code, out, _) = call(&["examples", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 6);
    }
}
