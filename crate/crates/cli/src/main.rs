use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use flatc3::suite::{self, SuiteConfig, SuiteName};
use flatc3::{io, Variant};

/// Seeded verification suites for the flat C3 geometries.
///
/// Without a subcommand, runs the requested suites and exits 0 iff every
/// report passed.
#[derive(Parser, Debug)]
#[command(name = "flatc3", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// RH or CO; both when omitted.
    #[arg(long, value_parser = parse_variant)]
    variant: Option<Variant>,

    #[arg(long, default_value_t = 1000)]
    samples: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 1e-9)]
    tol: f64,

    /// Write the JSON report here (an array when several suites run).
    #[arg(long)]
    report: Option<PathBuf>,

    /// Suite to run; repeatable, all suites when omitted.
    #[arg(long = "suite", value_parser = parse_suite)]
    suites: Vec<SuiteName>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce a closed point-based path to a primitive path with a trace.
    Reduce { input: PathBuf, output: PathBuf },
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("unknown variant `{s}` (expected RH or CO)"))
}

fn parse_suite(s: &str) -> Result<SuiteName, String> {
    SuiteName::parse(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(Command::Reduce { input, output }) = cli.command {
        let reduced = io::reduce_file(&input, &output)
            .with_context(|| format!("reducing {}", input.display()))?;
        println!(
            "reduced to a primitive path with {} moves, written to {}",
            reduced.trace.moves.len(),
            output.display()
        );
        return Ok(true);
    }

    let suites = if cli.suites.is_empty() {
        SuiteName::ALL.to_vec()
    } else {
        cli.suites
    };
    let variants = match cli.variant {
        Some(v) => vec![v],
        None => vec![Variant::RH, Variant::CO],
    };
    let mut reports = Vec::new();
    for &name in &suites {
        for &variant in &variants {
            let mut cfg = SuiteConfig::new(name, variant, cli.samples, cli.seed, cli.tol);
            cfg.report_path = cli.report.clone();
            let start = Instant::now();
            let report = suite::run_suite(&cfg)?;
            println!(
                "{} {:<20} {} max_residual {:.3e} failures {} ({:.2?})",
                if report.passed { "PASS" } else { "FAIL" },
                name.name(),
                variant.name(),
                report.max_residual,
                report.failures.len(),
                start.elapsed()
            );
            for f in report.failures.iter().take(3) {
                println!("    sample {}: {}", f.sample_index, f.detail);
            }
            reports.push(report);
        }
    }
    if let Some(path) = &cli.report {
        let doc = match reports.as_slice() {
            [one] => one.to_json(),
            many => serde_json::Value::Array(many.iter().map(|r| r.to_json()).collect()),
        };
        io::write_json(path, &doc)?;
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
