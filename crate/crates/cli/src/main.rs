use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use planar_switching_cli::commands::{self, Outcome, Overrides};
use planar_switching_cli::input::{read_document, ForcedRoot};
use planar_switching_cli::CliError;

/// Stability analysis for switched systems of 2x2 complex matrices.
#[derive(Parser)]
#[command(name = "planar-switching", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full regime verdict.
    Classify(Common),
    /// Escape witness and its trajectory as CSV.
    Escape(Common),
    /// Exact rates b_n with normalized columns as CSV.
    Rates(Common),
    /// JSR bracket by exhaustive enumeration.
    Jsr(Common),
    /// Certified bound on product norms, or the linear ceiling.
    Bound(Common),
}

#[derive(Args)]
struct Common {
    /// Input document; standard input when absent or `-`.
    input: Option<PathBuf>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    band: Option<f64>,
    #[arg(long)]
    qmax: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    assert_unit_jsr: bool,
    /// Declare member INDEX's eigenvalue ratio a root of unity of ORDER.
    #[arg(long, num_args = 2, value_names = ["INDEX", "ORDER"], action = clap::ArgAction::Append)]
    force_root: Vec<u32>,
    /// Declare member INDEX's eigenvalue ratio not a root of unity.
    #[arg(long, value_name = "INDEX")]
    force_irrational: Vec<usize>,
    /// CSV destination; the CSV goes to standard output otherwise and the
    /// report to standard error.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            tol: self.tol,
            q_max: self.qmax,
            depth: self.depth,
            band: self.band,
            steps: self.steps,
            assert_unit_jsr: self.assert_unit_jsr,
            forced_roots: self
                .force_root
                .chunks_exact(2)
                .map(|c| ForcedRoot { index: c[0] as usize, order: c[1] })
                .collect(),
            forced_irrational: self.force_irrational.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (common, f): (&Common, fn(_, _) -> Result<Outcome, CliError>) = match &cli.command {
        Command::Classify(c) => (c, commands::classify),
        Command::Escape(c) => (c, commands::escape),
        Command::Rates(c) => (c, commands::rates),
        Command::Jsr(c) => (c, commands::jsr),
        Command::Bound(c) => (c, commands::bound),
    };
    let doc = read_document(common.input.as_deref())?;
    let settings = commands::resolve(&doc, &common.overrides())?;
    let outcome = f(doc, settings)?;
    let json = outcome.report.to_json();
    match (outcome.csv, &common.out) {
        (Some(csv), Some(path)) => {
            std::fs::write(path, csv)?;
            std::io::stdout().write_all(json.as_bytes())?;
        }
        (Some(csv), None) => {
            std::io::stdout().write_all(csv.as_bytes())?;
            std::io::stderr().write_all(json.as_bytes())?;
        }
        (None, _) => std::io::stdout().write_all(json.as_bytes())?,
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    // Usage errors exit 1, not clap's default 2, which means "unstable" here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
