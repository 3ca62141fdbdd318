//! Command-line driver for the verification suites.
//!
//! Subcommands:
//!   verify <config>       run the selected suites against a config file
//!   dump-matrix <config>  write one named operator in the dump format
//!   report <report.json>  re-render a saved JSON report
//!
//! Exit status is 0 exactly when every executed check passed.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use qtrace::config::SuiteConfig;
use qtrace::{emit, run};

#[derive(Parser)]
#[command(name = "qtrace", version, about = "Residual verification suites for boundary reflection algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites described by a config file.
    Verify {
        /// Path to the JSON config.
        config: PathBuf,
        /// Restrict to these suites (repeatable); overrides the config.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Override the sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the composite tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Output format.
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one named operator and write it in the dump format.
    DumpMatrix {
        /// Path to the JSON config.
        config: PathBuf,
        /// Which operator to build: r, v, m, k, k_plus, t, transfer, fused_r.
        #[arg(long)]
        object: String,
        /// Output path for the dump.
        #[arg(long)]
        dump: PathBuf,
    },
    /// Re-render a saved JSON report.
    Report {
        /// Path to a report produced by `verify --format json`.
        report: PathBuf,
        /// Output format.
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn load_config(path: &PathBuf) -> Result<SuiteConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    Ok(SuiteConfig::parse(&text)?)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn main_inner() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            config,
            suites,
            seed,
            tol,
            format,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if !suites.is_empty() {
                cfg.suites = suites;
            }
            if let Some(seed) = seed {
                cfg.sampling.seed = seed;
            }
            if let Some(tol) = tol {
                cfg.tolerances.composite = tol;
                cfg.tolerances.axiom = tol;
            }
            cfg.validate()?;
            let started = Instant::now();
            let report = run::run(&cfg)?;
            let elapsed = started.elapsed().as_millis();
            let rendered = match format {
                Format::Json => emit::to_json(&report),
                Format::Text => emit::to_text(&report, Some(elapsed)),
            };
            match out {
                Some(path) => std::fs::write(&path, rendered)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{rendered}"),
            }
            Ok(report.all_pass)
        }
        Command::DumpMatrix {
            config,
            object,
            dump,
        } => {
            let cfg = load_config(&config)?;
            let op = run::build_object(&cfg, &object)?;
            std::fs::write(&dump, qtrace_core::dump::write_dump(&op))
                .with_context(|| format!("writing {}", dump.display()))?;
            Ok(true)
        }
        Command::Report { report, format } => {
            let text = std::fs::read_to_string(&report)
                .with_context(|| format!("reading {}", report.display()))?;
            let parsed: run::RunReport = serde_json::from_str(&text)?;
            let rendered = match format {
                Format::Json => emit::to_json(&parsed),
                Format::Text => emit::to_text(&parsed, None),
            };
            print!("{rendered}");
            Ok(parsed.all_pass)
        }
    }
}
