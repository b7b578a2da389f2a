use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hls_stab::experiments::{constants_table, error_exit_code, run_scenario, ExperimentConfig, Scenario};
use hls_stab::Error;

/// Run one hls-stab experiment scenario.
#[derive(Debug, Parser)]
#[command(name = "hls-stab", version, about)]
struct Cli {
    /// constants | verify-bubble | interaction-sweep | stability | ineq-fuzz | bump-check
    scenario: String,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's "output", else ./hls-stab-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; HLS_STAB_THREADS takes precedence.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, short)]
    verbose: bool,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Error> {
    match std::env::var("HLS_STAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::ConfigParse(format!("HLS_STAB_THREADS='{v}' is not a thread count"))),
        Err(_) => Ok(flag),
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    let scenario: Scenario = cli.scenario.parse()?;
    if let Some(k) = thread_count(cli.threads)? {
        hls_stab::par::init_threads(k);
    }
    let mut config = ExperimentConfig::load(&cli.config)?;
    match config.scenario {
        Some(s) if s != scenario => {
            return Err(Error::ConfigParse(format!(
                "config is for scenario '{}' but '{}' was requested",
                s.name(),
                scenario.name()
            )))
        }
        _ => config.scenario = Some(scenario),
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = cli
        .out
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("hls-stab-out"));
    log::info!("{} on {} thread(s), output in {}", scenario.name(), hls_stab::par::threads(), out.display());
    let outcome = run_scenario(&config, &out)?;
    if scenario == Scenario::Constants {
        for (name, value) in constants_table(&config.params) {
            println!("{name:<18} {value}");
        }
    }
    for c in &outcome.checks {
        println!("{} {} = {:.6e} (limit {:.3e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.limit);
    }
    println!("wrote {}", out.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hls-stab: {e}");
            error_exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
