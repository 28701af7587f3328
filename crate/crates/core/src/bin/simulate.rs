//! Command-line front end: run a configured Monte-Carlo experiment and write
//! the CSV/JSON results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cfmimo::config::{parse_scheme_list, SimConfig};
use cfmimo::error::{Error, Result};
use cfmimo::harness::{emit_results, run_experiment};

#[derive(Parser)]
#[command(
    name = "simulate",
    version,
    about = "Monte-Carlo cell-free massive MIMO uplink experiments"
)]
struct Cli {
    /// Configuration file (one `key = value` per line, # comments).
    #[arg(long)]
    config: PathBuf,

    /// Output directory for sumrate_vs_L.csv, rate_cdf.csv and summary.json.
    #[arg(long)]
    out: PathBuf,

    /// Override the number of Monte-Carlo drops.
    #[arg(long)]
    drops: Option<usize>,

    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Comma-separated scheme list: pbvc,fcf,uc,lsfd,lsfd_pbvc.
    #[arg(long, value_name = "LIST")]
    schemes: Option<String>,

    /// Sweep of VC sizes as START:END:STEP (inclusive), or a single value.
    #[arg(long = "sweep-L", value_name = "START:END:STEP")]
    sweep_l: Option<String>,

    /// Comma-separated user counts to sweep.
    #[arg(long = "K", value_name = "LIST")]
    k: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut config = SimConfig::from_file(&cli.config)?;
    if let Some(drops) = cli.drops {
        config.drops = drops;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(schemes) = &cli.schemes {
        config.schemes = parse_scheme_list(schemes)?;
    }
    config.validate()?;

    let ls = match &cli.sweep_l {
        Some(spec) => parse_sweep(spec)?,
        None => vec![config.l],
    };
    let ks = match &cli.k {
        Some(spec) => parse_list(spec)?,
        None => vec![config.k],
    };
    let sweep: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| ls.iter().map(move |&l| (l, k)))
        .collect();

    let result = run_experiment(&config, &sweep)?;
    emit_results(&result, &cli.out)?;

    for a in &result.aggregates {
        println!(
            "{:<9} L={:<3} K={:<3} mean sum-rate {:>9.3} Mbit/s   95%-likely {:>7.3} Mbit/s",
            a.scheme.to_string(),
            a.l,
            a.k,
            a.mean_sum_rate_bps / 1e6,
            a.likely95_throughput_bps / 1e6
        );
    }
    for d in &result.diagnostics {
        let scheme = d.scheme.map_or_else(|| "drop setup".to_string(), |s| s.to_string());
        eprintln!(
            "warning: sweep point L={} K={} aborted at drop {} ({scheme}): {}",
            d.l, d.k, d.drop_index, d.message
        );
    }
    Ok(())
}

/// Parse `START:END:STEP` (inclusive) or a single value.
fn parse_sweep(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid sweep '{spec}', expected START:END:STEP"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![single.trim().parse().map_err(|_| bad())?]),
        [start, end, step] => {
            let start: usize = start.trim().parse().map_err(|_| bad())?;
            let end: usize = end.trim().parse().map_err(|_| bad())?;
            let step: usize = step.trim().parse().map_err(|_| bad())?;
            if step == 0 || end < start {
                return Err(bad());
            }
            Ok((start..=end).step_by(step).collect())
        }
        _ => Err(bad()),
    }
}

fn parse_list(spec: &str) -> Result<Vec<usize>> {
    let values: Vec<usize> = spec
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid integer '{p}' in list '{spec}'")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Config(format!("empty list '{spec}'")));
    }
    Ok(values)
}
