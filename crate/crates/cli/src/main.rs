use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use twobundle::liecm::{instances, CrossedModule};
use twobundle::report::Report;
use twobundle::scenario::{self, Scenario, ScenarioError, ScenarioKind};
use twobundle::suites::{self, RunConfig, SuiteError, SuiteKind};

#[derive(Parser)]
#[command(name = "twobundle", version, about = "Exact identity checks for strict principal 2-bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run identity suites on a crossed module.
    Verify(VerifyArgs),
    /// Check or act on a cocycle scenario.
    Cocycle {
        #[command(subcommand)]
        action: CocycleAction,
    },
    /// Emit a reproducible random scenario.
    Random(RandomArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Shipped id (CM-T, CM-C, CM-A, CM-H) or a crossed-module JSON file.
    #[arg(long)]
    cm: String,
    /// Suite name or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncation degree, at least 4.
    #[arg(long, env = "TWOBUNDLE_TRUNCATION", default_value_t = 6, value_parser = clap::value_parser!(u16).range(4..))]
    truncation: u16,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Cover size for the cocycle suite.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    patches: u64,
    /// Report path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CocycleAction {
    /// Audit the scenario's paracocycle and its base cocycle.
    Check {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transform by a paraequivalence and check the round trip back.
    Transform {
        scenario: PathBuf,
        /// Paraequivalence seed; defaults to the scenario's pending one.
        #[arg(long)]
        seed: Option<u64>,
        /// Transform by the inverse instead.
        #[arg(long)]
        inverse: bool,
        /// Where to write the transformed scenario.
        #[arg(long)]
        write: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pass to an equivalent paracocycle.
    Equivalence {
        scenario: PathBuf,
        /// Equivalence-data seed; defaults to the scenario's pending one.
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write the resulting scenario.
        #[arg(long)]
        write: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Paracocycle,
    Paraequivalence,
    Equivalence,
}

impl From<Kind> for ScenarioKind {
    fn from(k: Kind) -> ScenarioKind {
        match k {
            Kind::Paracocycle => ScenarioKind::Paracocycle,
            Kind::Paraequivalence => ScenarioKind::Paraequivalence,
            Kind::Equivalence => ScenarioKind::Equivalence,
        }
    }
}

#[derive(Args)]
struct RandomArgs {
    kind: Kind,
    #[arg(long)]
    cm: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    patches: u64,
    /// Scenario path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything that is not an identity failure exits with status 2.
#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("crossed module {0}: {1}")]
    Cm(String, twobundle::liecm::CmError),
    #[error("{0}")]
    Suite(#[from] SuiteError),
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

/// A shipped id, or a file path resolved against `base`.
fn load_cm(spec: &str, base: Option<&Path>) -> Result<CrossedModule, CliError> {
    if let Some(cm) = instances::by_id(spec) {
        return Ok(cm);
    }
    let path = match base {
        Some(b) if Path::new(spec).is_relative() => b.join(spec),
        _ => PathBuf::from(spec),
    };
    instances::load_json(&read(&path)?).map_err(|e| CliError::Cm(spec.into(), e))
}

fn load_scenario(path: &Path) -> Result<(Scenario, CrossedModule), CliError> {
    let sc = Scenario::from_json(&read(path)?)?;
    let cm = load_cm(&sc.cm, path.parent())?;
    Ok((sc, cm))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, &format!("{text}\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn finish(report: &Report, out: Option<&Path>) -> Result<bool, CliError> {
    emit(&report.to_json(), out)?;
    let total: usize = report.suites.iter().map(|s| s.checks.len()).sum();
    let failed: Vec<_> = report.failures().collect();
    for f in failed.iter().take(20) {
        eprintln!("FAIL {} ({})", f.id, f.anchor);
    }
    eprintln!("{} {}/{} checks passed", if failed.is_empty() { "PASS" } else { "FAIL" }, total - failed.len(), total);
    Ok(failed.is_empty())
}

fn verify(a: &VerifyArgs) -> Result<bool, CliError> {
    let cm = load_cm(&a.cm, None)?;
    let kinds = SuiteKind::parse_selection(&a.suite)?;
    let cfg = RunConfig { truncation: a.truncation, samples: a.samples as usize, seed: a.seed, patches: a.patches as usize, tamper: None };
    let mut report = Report::new(cm.id.clone(), cfg.truncation, cfg.seed, cfg.samples);
    for kind in kinds {
        report.suites.push(suites::run(&cm, kind, &cfg)?);
    }
    finish(&report, a.out.as_deref())
}

fn cocycle(action: &CocycleAction) -> Result<bool, CliError> {
    match action {
        CocycleAction::Check { scenario: path, out } => {
            let (sc, cm) = load_scenario(path)?;
            finish(&scenario::check(&sc, cm)?, out.as_deref())
        }
        CocycleAction::Transform { scenario: path, seed, inverse, write: dest, out } => {
            let (sc, cm) = load_scenario(path)?;
            let (report, next) = scenario::transform(&sc, cm, *seed, *inverse)?;
            if let Some(d) = dest {
                write(d, &format!("{}\n", next.to_json()))?;
            }
            finish(&report, out.as_deref())
        }
        CocycleAction::Equivalence { scenario: path, seed, write: dest, out } => {
            let (sc, cm) = load_scenario(path)?;
            let (report, next) = scenario::equivalence(&sc, cm, *seed)?;
            if let Some(d) = dest {
                write(d, &format!("{}\n", next.to_json()))?;
            }
            finish(&report, out.as_deref())
        }
    }
}

fn random(a: &RandomArgs) -> Result<bool, CliError> {
    load_cm(&a.cm, None)?;
    let sc = Scenario { patches: a.patches as usize, ..Scenario::random(a.kind.into(), a.cm.clone(), a.seed) };
    emit(&sc.to_json(), a.out.as_deref())?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => verify(a),
        Command::Cocycle { action } => cocycle(action),
        Command::Random(a) => random(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
