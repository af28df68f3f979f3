//! `finsler-audit`: audits, hp checks and derivations from scenario files.
//!
//! Exit codes: 0 all PASS, 1 an internal FAIL (or a failed hp check or
//! selftest), 2 an input error, 3 findings only.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use finsler_core::audit::{run_all, AuditOptions, Case};
use finsler_core::derive::{derive, QUANTITIES};
use finsler_core::dual::dual_check;
use finsler_core::fixtures::FixtureSet;
use finsler_core::scenario::{parse_with_seed, Scenario, DEFAULT_SCENARIO};
use finsler_core::{report, selftest, CoreError};

const INPUT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "finsler-audit", version, about = "Exact audit of (alpha, beta)-metric formulas under conformal change")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute every formula on a scenario and compare with the printed forms.
    Audit {
        /// Scenario file; the bundled default scenario when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Restrict the case-specific sections (repeatable).
        #[arg(long = "case", value_parser = parse_case)]
        cases: Vec<Case>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Printed-formula fixtures; the bundled set when omitted.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Decide hp(d) for an expression, graded and at the scenario points.
    Hpcheck {
        expression: String,
        #[arg(long)]
        degree: u32,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print a derived closed form.
    Derive {
        /// One of: partials, omega, A, B, cstar, dstar, spray, bij, cij, bimm, k, k-terms.
        quantity: String,
        #[arg(long = "case", value_parser = parse_case, default_value = "family")]
        case: Case,
    },
    /// Run the bundled invariant suite.
    Selftest {
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_case(s: &str) -> Result<Case, String> {
    s.parse()
}

/// An error from reading input, reported on stderr with exit code 2.
struct InputError(String);

impl From<CoreError> for InputError {
    fn from(e: CoreError) -> Self {
        InputError(e.to_string())
    }
}

fn load_scenario(path: Option<&PathBuf>, seed: Option<u64>) -> Result<Scenario, InputError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| InputError(format!("cannot read scenario {}: {e}", p.display())))?,
        None => DEFAULT_SCENARIO.to_string(),
    };
    let where_ = path.map(|p| p.display().to_string()).unwrap_or_else(|| "default scenario".into());
    parse_with_seed(&text, seed).map_err(|e| InputError(format!("{where_}: {e}")))
}

fn load_fixtures(path: Option<&PathBuf>) -> Result<FixtureSet, InputError> {
    match path {
        Some(p) => FixtureSet::load(p).map_err(|e| InputError(format!("{}: {e}", p.display()))),
        None => Ok(FixtureSet::bundled()),
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), InputError> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| InputError(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, InputError> {
    match cli.command {
        Command::Audit { scenario, cases, format, output, seed, fixtures } => {
            let sc = load_scenario(scenario.as_ref(), seed)?;
            let fx = load_fixtures(fixtures.as_ref())?;
            let mut opts = AuditOptions::default();
            if !cases.is_empty() {
                opts.cases = cases;
            }
            let rep = match run_all(&sc, &fx, &opts) {
                Ok(r) => r,
                Err(e @ CoreError::Fixture { .. }) => return Err(e.into()),
                Err(e) => {
                    eprintln!("error: audit failed: {e}");
                    return Ok(1);
                }
            };
            let text = match format {
                Format::Text => report::to_text(&rep),
                Format::Json => report::to_json(&rep) + "\n",
            };
            emit(&text, output.as_ref())?;
            Ok(rep.summary.exit_code as u8)
        }
        Command::Hpcheck { expression, degree, scenario, format } => {
            let sc = load_scenario(scenario.as_ref(), None)?;
            let v = dual_check(&expression, degree, &sc)?;
            match format {
                Format::Text => print!("{}", v.render()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&v).expect("verdict serializes")),
            }
            Ok(if v.holds() { 0 } else { 1 })
        }
        Command::Derive { quantity, case } => {
            if !QUANTITIES.contains(&quantity.as_str()) {
                return Err(InputError(format!("unknown quantity `{quantity}` (expected one of {})", QUANTITIES.join(", "))));
            }
            let text = derive(&quantity, case).map_err(|e| InputError(e.to_string()))?;
            print!("# {}\n{text}", case.anchor());
            Ok(0)
        }
        Command::Selftest { fixtures, seed } => {
            let fx = match load_fixtures(fixtures.as_ref()) {
                Ok(f) => f,
                Err(InputError(m)) => {
                    println!("FAIL fixtures {m}");
                    return Ok(1);
                }
            };
            match selftest::run(&fx, seed) {
                Ok(r) => {
                    print!("{}", r.render());
                    Ok(r.exit_code() as u8)
                }
                Err(e) => {
                    println!("FAIL selftest {e}");
                    Ok(1)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(InputError(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
