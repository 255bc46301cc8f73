//! `modal-lab` command-line front end.
//!
//! Exit status: 0 when every check passes, 1 when a check or property fails
//! (the report is still written), 2 for usage, configuration or I/O errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use modal_lab::properties::{verify, Suite, VerifySummary};
use modal_lab::scenarios::report::ScenarioReport;
use modal_lab::scenarios::{default_config, list_scenarios, run_scenario_scaled, ScenarioConfig};

/// Default output directory for reports when `--out` is not given.
const OUT_DIR_ENV: &str = "MODAL_LAB_OUT_DIR";

#[derive(Parser)]
#[command(name = "modal-lab", version, about = "Scenario runner and invariant checker for open-quantum-system conditional probabilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Run {
        /// Registered scenario name; defaults to the name in the config file.
        #[arg(long)]
        scenario: Option<String>,
        /// JSON config: {"name": ..., "parameters": {...}, "tolerances": {...}}.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path, or `-` for stdout. Defaults to `$MODAL_LAB_OUT_DIR/<scenario>-seed<seed>.<ext>`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Multiplies every check tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// Run randomized invariant suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Summary path, or `-` for stdout (the default).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// List registered scenarios with their parameters and default configs.
    List {
        #[arg(long, value_enum, default_value_t = ListFormat::Text)]
        format: ListFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ListFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SuiteArg {
    Channels,
    ConditionalProbs,
    PartialTrace,
    Trajectories,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Channels => Suite::Channels,
            SuiteArg::ConditionalProbs => Suite::ConditionalProbs,
            SuiteArg::PartialTrace => Suite::PartialTrace,
            SuiteArg::Trajectories => Suite::Trajectories,
            SuiteArg::All => Suite::All,
        }
    }
}

/// Failure that maps to exit status 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            config,
            seed,
            out,
            format,
            tolerance_scale,
        } => run(scenario, config, seed, out, format, tolerance_scale),
        Command::Verify {
            suite,
            trials,
            seed,
            out,
            format,
        } => run_verify(suite.into(), trials as usize, seed, out, format),
        Command::List { format } => list(format).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(scenario: Option<String>, config: Option<PathBuf>) -> Result<ScenarioConfig, UsageError> {
    match (scenario, config) {
        (None, None) => Err(UsageError("either --scenario or --config is required".into())),
        (Some(name), None) => Ok(default_config(&name)?),
        (name, Some(path)) => {
            let text = fs::read_to_string(&path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            let cfg = ScenarioConfig::from_json(&text)?;
            match name {
                Some(n) if n != cfg.name => Err(UsageError(format!(
                    "--scenario {n} does not match config scenario `{}`",
                    cfg.name
                ))),
                _ => Ok(cfg),
            }
        }
    }
}

fn output_path(out: Option<PathBuf>, stem: &str, format: Format) -> Option<PathBuf> {
    match out {
        Some(p) if p.as_os_str() == "-" => None,
        Some(p) => Some(p),
        None => {
            let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            Some(dir.join(format!("{stem}.{}", format.extension())))
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), UsageError> {
    match path {
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| UsageError(format!("{}: {e}", dir.display())))?;
            }
            fs::write(p, text).map_err(|e| UsageError(format!("{}: {e}", p.display())))
        }
    }
}

/// `report.json` gets curve files `report.<curve>.csv` alongside it.
fn curve_path(report: &Path, curve: &str) -> PathBuf {
    let stem = report.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    report.with_file_name(format!("{stem}.{curve}.csv"))
}

fn csv_float(v: f64) -> String {
    format!("{v:?}")
}

fn checks_csv(report: &ScenarioReport) -> Result<String, UsageError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(["check", "value", "expected", "tolerance", "comparison", "passed"])?;
    for c in &report.checks {
        let comparison = serde_json::to_value(c.comparison)?;
        w.write_record([
            c.name.clone(),
            csv_float(c.value),
            c.expected.map(csv_float).unwrap_or_default(),
            csv_float(c.tolerance),
            comparison.as_str().unwrap_or_default().to_string(),
            c.passed.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| UsageError(e.to_string()))?)?)
}

fn run(
    scenario: Option<String>,
    config: Option<PathBuf>,
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
    tolerance_scale: f64,
) -> Result<bool, UsageError> {
    let cfg = load_config(scenario, config)?;
    let report = run_scenario_scaled(&cfg, seed, tolerance_scale)?;
    let path = output_path(out, &format!("{}-seed{seed}", report.scenario), format);
    let body = match format {
        Format::Json => report.to_json(),
        Format::Csv => checks_csv(&report)?,
    };
    write_output(path.as_deref(), &body)?;
    if let Some(p) = &path {
        for (name, curve) in &report.curves {
            write_output(Some(&curve_path(p, name)), &curve.to_csv())?;
        }
    }
    for c in report.failed_checks() {
        eprintln!(
            "check failed: {} = {:e} (expected {:?}, tolerance {:e}, {:?})",
            c.name, c.value, c.expected, c.tolerance, c.comparison
        );
    }
    Ok(report.passed)
}

fn verify_csv(summary: &VerifySummary) -> Result<String, UsageError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(["suite", "property", "threshold", "trials", "passed", "worst_residual"])?;
    for p in &summary.properties {
        w.write_record([
            p.suite.clone(),
            p.name.clone(),
            csv_float(p.threshold),
            p.trials.to_string(),
            p.passed.to_string(),
            csv_float(p.worst_residual),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| UsageError(e.to_string()))?)?)
}

fn run_verify(suite: Suite, trials: usize, seed: u64, out: Option<PathBuf>, format: Format) -> Result<bool, UsageError> {
    let summary = verify(suite, trials, seed)?;
    let body = match format {
        Format::Json => summary.to_json()?,
        Format::Csv => verify_csv(&summary)?,
    };
    let path = match out {
        Some(p) if p.as_os_str() != "-" => Some(p),
        _ => None,
    };
    write_output(path.as_deref(), &body)?;
    for p in summary.properties.iter().filter(|p| !p.ok()) {
        eprintln!(
            "property failed: {}/{} passed {}/{} (threshold {:e}, worst {:e})",
            p.suite, p.name, p.passed, p.trials, p.threshold, p.worst_residual
        );
        for c in &p.counterexamples {
            eprintln!("  counterexample: {}", serde_json::to_string(c)?);
        }
    }
    Ok(summary.passed)
}

fn list(format: ListFormat) -> Result<(), UsageError> {
    let infos = list_scenarios();
    let text = match format {
        ListFormat::Json => serde_json::to_string_pretty(&infos)? + "\n",
        ListFormat::Text => {
            let mut s = String::new();
            for info in &infos {
                s.push_str(&format!("{:<24} {}\n", info.name, info.description));
                for p in &info.parameters {
                    s.push_str(&format!("    {:<14} {} (default {})\n", p.name, p.description, p.default));
                }
            }
            s
        }
    };
    write_output(None, &text)
}
