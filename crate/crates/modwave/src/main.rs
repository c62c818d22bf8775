use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use modwave::{campaigns, parse_config, run_campaign, Status};

#[derive(Parser)]
#[command(name = "modwave", version, about = "Numerical experiments for the final-state cubic NLS")]
struct Cli {
    /// One of: verify-spectral, verify-dispersive, verify-forcing, construct, roundtrip, sweep.
    subcommand: String,
    /// `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn run(cli: &Cli) -> anyhow::Result<Status> {
    if !campaigns().iter().any(|c| c.name() == cli.subcommand) {
        let names: Vec<_> = campaigns().iter().map(|c| c.name()).collect();
        anyhow::bail!("unknown subcommand '{}'; expected one of {}", cli.subcommand, names.join(", "));
    }
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading config {}", cli.config.display()))?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    let out = cli.out.clone().unwrap_or_else(|| config.output_dir.clone());
    let report = run_campaign(&cli.subcommand, &config, Some(&out))?;
    for check in &report.checks {
        log::info!("{} = {:.3e} ({})", check.name, check.value, if check.passed { "pass" } else { "FAIL" });
    }
    if let Some(reason) = &report.reason {
        eprintln!("{{\"status\":\"failed\",\"reason\":{}}}", serde_json::to_string(reason)?);
    }
    Ok(report.status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = std::env::var("MODWAVE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(Status::Passed) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(EXIT_FAILED),
        Ok(Status::Error) => ExitCode::from(EXIT_ERROR),
        Err(e) => {
            let reason = serde_json::to_string(&format!("{e:#}")).unwrap_or_default();
            eprintln!("{{\"status\":\"error\",\"reason\":{reason}}}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
