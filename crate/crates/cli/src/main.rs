//! `kgman <experiment> --config <file> [--out DIR] [--jobs K]`
//!
//! Exit codes: 0 all checks pass, 1 usage or output error, 2 config error,
//! 3 failed check or failed computation.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{RawConfig, Settings};
use experiments::{Context, Experiment, RunError};
use output::Sink;

#[derive(Debug, Parser)]
#[command(name = "kgman", version, about = "Klein-Gordon homoclinic and invariant-manifold experiments")]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    /// key = value configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output root; falls back to $KGMAN_OUT, then ./out
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent sweep points
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CHECK: u8 = 3;

fn output_root(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("KGMAN_OUT").filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let name = cli.experiment.name();

    let settings = match RawConfig::load(&cli.config).and_then(|raw| Settings::from_raw(raw, name)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("kgman: config error: {}", e.0);
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs as usize).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("kgman: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let mut sink = match Sink::create(output_root(&cli).join(name)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("kgman: output error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let result = pool.install(|| {
        let mut ctx = Context { settings: &settings, sink: &mut sink };
        experiments::run(cli.experiment, &mut ctx)
    });
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("kgman: {name}: {e}");
            return ExitCode::from(match e {
                RunError::Config(_) => EXIT_CONFIG,
                RunError::Failure(_) => EXIT_CHECK,
                RunError::Io(_) => EXIT_USAGE,
            });
        }
    };
    if let Err(e) = sink.table("checks", &report.table()) {
        eprintln!("kgman: output error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    for c in &report.checks {
        println!(
            "{} {}: {} {} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            output::format_number(c.value),
            c.relation,
            output::format_number(c.threshold)
        );
    }
    println!("wrote {} files to {}", sink.written().len(), sink.dir().display());
    match report.first_failure() {
        Some(c) => {
            eprintln!("kgman: {name}: check failed: {}", c.name);
            ExitCode::from(EXIT_CHECK)
        }
        None => ExitCode::SUCCESS,
    }
}
