//! Experiment orchestration: runs the configured schemes over Monte-Carlo
//! drops with common random numbers, aggregates sum rates, per-user rate
//! samples and backhaul loads, and writes the CSV/JSON outputs.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::assignment::{
    build_weight_matrix, hungarian_max, hungarian_max_shared, AssociationResult,
};
use crate::channel::{build_stats, fpc_powers, ChannelStats};
use crate::clustering::{
    backhaul_load, build_fcf_sets, build_pbvc, build_uc_sets, ClusterCatalog, ServingAssignment,
};
use crate::config::{Scheme, SimConfig};
use crate::error::{Error, Result};
use crate::geometry::{drop_network, NetworkLayout};
use crate::rng::substream_seed;
use crate::sinr::{lsfd_sinr, rate_from_sinr, sinr_closed_form, RateReport};

/// Outcome of one scheme on one drop.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub report: RateReport,
    pub serving: ServingAssignment,
    /// The Hungarian association, present for the VC-based schemes.
    pub association: Option<AssociationResult>,
}

/// Per-(scheme, drop) record.
#[derive(Debug, Clone, Serialize)]
pub struct DropRecord {
    pub scheme: Scheme,
    pub l: usize,
    pub k: usize,
    pub drop_index: usize,
    /// Base substream seed identifying this drop's randomness.
    pub seed: u64,
    pub sum_rate_bps: f64,
    pub user_rates_bps: Vec<f64>,
    pub ap_user_pairs: u64,
    pub cpu_coop_pairs: u64,
}

/// Aggregates over the drops of one (scheme, L, K) sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub scheme: Scheme,
    pub l: usize,
    pub k: usize,
    pub drops: usize,
    pub mean_sum_rate_bps: f64,
    /// Standard error of the per-drop sum rates.
    pub stderr_sum_rate_bps: f64,
    /// 95%-likely throughput: the 5th percentile of the pooled per-user
    /// rates (nearest-rank convention).
    pub likely95_throughput_bps: f64,
    pub mean_ap_user_pairs: f64,
    pub mean_cpu_coop_pairs: f64,
}

/// One aborted sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub l: usize,
    pub k: usize,
    pub drop_index: usize,
    /// The scheme that failed; absent when the drop itself could not be built.
    pub scheme: Option<Scheme>,
    pub message: String,
}

/// Everything one experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub per_drop: Vec<DropRecord>,
    pub aggregates: Vec<Aggregate>,
    pub diagnostics: Vec<Diagnostic>,
    pub drops: usize,
    pub seed: u64,
}

/// Evaluate one scheme on one drop. The VC-based schemes solve the matching
/// at uniform maximum power; every scheme is then rated under fractional
/// power control over its own serving sets.
pub fn run_scheme(
    scheme: Scheme,
    layout: &NetworkLayout,
    stats: &ChannelStats,
    catalog: &ClusterCatalog,
    config: &SimConfig,
) -> Result<SchemeRun> {
    let m = layout.ap_positions.len();
    let k_users = layout.user_positions.len();
    let (served_by, association) = match scheme {
        Scheme::Fcf | Scheme::Lsfd => (build_fcf_sets(m, k_users), None),
        Scheme::Uc => (build_uc_sets(&stats.beta, config.l), None),
        Scheme::Pbvc | Scheme::LsfdPbvc => {
            let association = associate(catalog, stats, config)?;
            let served: Vec<Vec<usize>> = association
                .assigned_vc
                .iter()
                .map(|&j| catalog.virtual_clusters[j].clone())
                .collect();
            (served, Some(association))
        }
    };
    let eta = fpc_powers(&stats.beta, &served_by, config)?;
    let sinr: Vec<f64> = match scheme {
        Scheme::Fcf | Scheme::Uc | Scheme::Pbvc => (0..k_users)
            .map(|k| sinr_closed_form(k, &served_by[k], stats, &eta, config.n_ap))
            .collect::<Result<_>>()?,
        Scheme::Lsfd | Scheme::LsfdPbvc => (0..k_users)
            .map(|k| lsfd_sinr(k, &served_by[k], stats, &eta, config.n_ap).map(|(s, _)| s))
            .collect::<Result<_>>()?,
    };
    let report = rate_from_sinr(&sinr, config);
    let serving = ServingAssignment::new(served_by, &layout.cell_centric_clusters, m);
    Ok(SchemeRun { report, serving, association })
}

fn associate(
    catalog: &ClusterCatalog,
    stats: &ChannelStats,
    config: &SimConfig,
) -> Result<AssociationResult> {
    let weights = build_weight_matrix(catalog, stats, config)?;
    if config.allow_vc_sharing {
        hungarian_max_shared(&weights.f)
    } else {
        hungarian_max(&weights.f)
    }
}

/// Run the full experiment over the (L, K) sweep points.
///
/// Each drop derives fresh layout/shadowing/pilot substreams from
/// (seed, drop index, purpose), and every scheme within a drop consumes the
/// identical randomness. A failing scheme aborts its sweep point with a
/// diagnostic record; the other points are unaffected.
pub fn run_experiment(config: &SimConfig, sweep: &[(usize, usize)]) -> Result<ExperimentResult> {
    config.validate()?;
    let mut per_drop = Vec::new();
    let mut aggregates = Vec::new();
    let mut diagnostics = Vec::new();

    for &(l, k) in sweep {
        let point_config = SimConfig { l, k, ..config.clone() };
        point_config.validate()?;
        let mut records: Vec<DropRecord> = Vec::new();
        let mut aborted = false;

        'drops: for drop_index in 0..config.drops {
            let drop_idx = drop_index as u64;
            let drop_seed = substream_seed(config.seed, drop_idx, "drop");
            let built = (|| -> Result<(NetworkLayout, ChannelStats, ClusterCatalog)> {
                let layout =
                    drop_network(&point_config, substream_seed(config.seed, drop_idx, "layout"))?;
                let stats = build_stats(
                    &layout,
                    &point_config,
                    substream_seed(config.seed, drop_idx, "shadow"),
                    substream_seed(config.seed, drop_idx, "pilot"),
                )?;
                let catalog = build_pbvc(&layout, point_config.l)?;
                Ok((layout, stats, catalog))
            })();
            let (layout, stats, catalog) = match built {
                Ok(parts) => parts,
                Err(e) => {
                    diagnostics.push(Diagnostic {
                        l,
                        k,
                        drop_index,
                        scheme: None,
                        message: e.to_string(),
                    });
                    aborted = true;
                    break 'drops;
                }
            };
            for &scheme in &point_config.schemes {
                match run_scheme(scheme, &layout, &stats, &catalog, &point_config) {
                    Ok(run) => {
                        let (ap_user_pairs, cpu_coop_pairs) = backhaul_load(&run.serving);
                        records.push(DropRecord {
                            scheme,
                            l,
                            k,
                            drop_index,
                            seed: drop_seed,
                            sum_rate_bps: run.report.sum_rate,
                            user_rates_bps: run.report.rate,
                            ap_user_pairs,
                            cpu_coop_pairs,
                        });
                    }
                    Err(e) => {
                        diagnostics.push(Diagnostic {
                            l,
                            k,
                            drop_index,
                            scheme: Some(scheme),
                            message: e.to_string(),
                        });
                        aborted = true;
                        break 'drops;
                    }
                }
            }
        }

        if !aborted {
            aggregates.extend(aggregate_point(&point_config, &records));
            per_drop.extend(records);
        }
    }

    Ok(ExperimentResult {
        per_drop,
        aggregates,
        diagnostics,
        drops: config.drops,
        seed: config.seed,
    })
}

/// Aggregate one sweep point's records per scheme. The reduction sorts by
/// drop index first, so the result does not depend on execution order.
fn aggregate_point(config: &SimConfig, records: &[DropRecord]) -> Vec<Aggregate> {
    config
        .schemes
        .iter()
        .map(|&scheme| {
            let mut of_scheme: Vec<&DropRecord> =
                records.iter().filter(|r| r.scheme == scheme).collect();
            of_scheme.sort_by_key(|r| r.drop_index);
            let n = of_scheme.len();
            let nf = n as f64;
            let sum_rates: Vec<f64> = of_scheme.iter().map(|r| r.sum_rate_bps).collect();
            let mean = sum_rates.iter().sum::<f64>() / nf;
            let stderr = if n > 1 {
                let var = sum_rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (nf - 1.0);
                (var / nf).sqrt()
            } else {
                0.0
            };
            let mut pooled: Vec<f64> = of_scheme
                .iter()
                .flat_map(|r| r.user_rates_bps.iter().copied())
                .collect();
            pooled.sort_by(f64::total_cmp);
            Aggregate {
                scheme,
                l: config.l,
                k: config.k,
                drops: n,
                mean_sum_rate_bps: mean,
                stderr_sum_rate_bps: stderr,
                likely95_throughput_bps: percentile_nearest_rank(&pooled, 0.05),
                mean_ap_user_pairs: of_scheme.iter().map(|r| r.ap_user_pairs as f64).sum::<f64>()
                    / nf,
                mean_cpu_coop_pairs: of_scheme.iter().map(|r| r.cpu_coop_pairs as f64).sum::<f64>()
                    / nf,
            }
        })
        .collect()
}

/// Nearest-rank percentile of an ascending-sorted sample:
/// the ⌈p·n⌉-th smallest value.
fn percentile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let scaled = p * sorted.len() as f64;
    // p·n carries rounding noise; snap to the integer when it is one
    let rank = if (scaled - scaled.round()).abs() < 1e-9 {
        scaled.round()
    } else {
        scaled.ceil()
    } as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[derive(Serialize)]
struct Summary<'a> {
    drops: usize,
    seed: u64,
    points: &'a [Aggregate],
    diagnostics: &'a [Diagnostic],
}

/// The summary.json payload for an experiment.
pub fn summary_json(result: &ExperimentResult) -> String {
    let summary = Summary {
        drops: result.drops,
        seed: result.seed,
        points: &result.aggregates,
        diagnostics: &result.diagnostics,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serialization");
    text.push('\n');
    text
}

/// Write the three result files into `out_dir` (created if missing):
/// `sumrate_vs_L.csv`, `rate_cdf.csv` and `summary.json`. Row order is
/// deterministic and numbers are written in round-trip double precision.
pub fn emit_results(result: &ExperimentResult, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut sumrate = String::from("scheme,L,K,mean_sum_rate_bps,stderr\n");
    for a in &result.aggregates {
        sumrate.push_str(&format!(
            "{},{},{},{},{}\n",
            a.scheme, a.l, a.k, a.mean_sum_rate_bps, a.stderr_sum_rate_bps
        ));
    }
    write_text(&out_dir.join("sumrate_vs_L.csv"), &sumrate)?;

    let mut cdf = String::from("scheme,L,K,rate_bps\n");
    for record in &result.per_drop {
        for &rate in &record.user_rates_bps {
            cdf.push_str(&format!("{},{},{},{}\n", record.scheme, record.l, record.k, rate));
        }
    }
    write_text(&out_dir.join("rate_cdf.csv"), &cdf)?;

    write_text(&out_dir.join("summary.json"), &summary_json(result))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text.as_bytes()).map_err(|e| Error::io(path, e))
}
