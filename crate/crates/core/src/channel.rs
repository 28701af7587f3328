//! Large-scale channel statistics: pathloss, correlated shadowing, noise
//! power, pilot assignment, MMSE estimate quality and fractional power
//! control.
//!
//! Everything here is deterministic in its seed and operates in linear scale
//! internally; dB enters and leaves only at the model boundaries.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::geometry::{wrap_distance, NetworkLayout, Point3};

/// Pathloss distances below this are clamped; the model is not valid at
/// arm's length from the antenna.
pub const MIN_PATHLOSS_DISTANCE_M: f64 = 1.0;

const SHADOW_JITTER: f64 = 1e-10;

/// Large-scale and estimation statistics for one drop.
///
/// All matrices are K×M (users × APs), linear scale.
#[derive(Debug, Clone)]
pub struct ChannelStats {
    /// LSF power gains β.
    pub beta: DMatrix<f64>,
    /// Mean-squares γ of the per-antenna MMSE channel estimates.
    pub gamma: DMatrix<f64>,
    /// MMSE projection gains α.
    pub alpha: DMatrix<f64>,
    /// Pilot index per user, in 0..tau_p.
    pub pilot_of: Vec<usize>,
    /// Receiver noise power σ²_w, watts.
    pub noise_power: f64,
    /// Pilot energy per user, p_k = τ_p · p̃_k.
    pub pilot_power: Vec<f64>,
}

impl ChannelStats {
    pub fn num_users(&self) -> usize {
        self.beta.nrows()
    }

    pub fn num_aps(&self) -> usize {
        self.beta.ncols()
    }
}

/// Deterministic part of β in dB at 3D distance `d` meters, carrier `f_c` GHz.
pub fn pathloss_db(d: f64, f_c_ghz: f64) -> f64 {
    let d = d.max(MIN_PATHLOSS_DISTANCE_M);
    -36.7 * d.log10() - 22.7 - 26.0 * f_c_ghz.log10()
}

/// Receiver noise power in watts from the PSD (dBm/Hz), bandwidth (Hz) and
/// noise figure (dB).
pub fn noise_power(noise_psd_dbm_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    let dbm = noise_psd_dbm_hz + 10.0 * bandwidth_hz.log10() + noise_figure_db;
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Correlated shadow fading in dB, K×M.
///
/// z_{k,m} = √δ·a_m + √(1−δ)·b_k with a and b zero-mean Gaussian vectors of
/// variance σ²_sh and spatial covariance exp(−d/d_corr), using wrap distances
/// among APs and among users respectively.
pub fn correlated_shadowing(
    layout: &NetworkLayout,
    config: &SimConfig,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let m = layout.ap_positions.len();
    let k = layout.user_positions.len();
    let sigma = config.shadow_sigma_db;
    if sigma == 0.0 {
        return Ok(DMatrix::zeros(k, m));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d_corr = config.shadow_corr_distance_m;
    let a = sample_correlated(&layout.ap_positions, layout.side, d_corr, sigma, &mut rng)?;
    let b = sample_correlated(&layout.user_positions, layout.side, d_corr, sigma, &mut rng)?;
    let delta = config.shadow_split;
    let (wa, wb) = (delta.sqrt(), (1.0 - delta).sqrt());
    Ok(DMatrix::from_fn(k, m, |ki, mi| wa * a[mi] + wb * b[ki]))
}

/// Zero-mean Gaussian vector with stdev `sigma` and correlation
/// exp(−d/d_corr) between the given points, via Cholesky sampling.
fn sample_correlated(
    points: &[Point3],
    side: f64,
    d_corr: f64,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<DVector<f64>> {
    let n = points.len();
    let mut cov = DMatrix::from_fn(n, n, |i, j| {
        (-wrap_distance(points[i], points[j], side) / d_corr).exp()
    });
    // draw before factorizing so the stream position does not depend on the
    // retry path
    let xi = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let chol = match Cholesky::new(cov.clone()) {
        Some(c) => c,
        None => {
            // coincident points make the covariance rank-deficient
            for i in 0..n {
                cov[(i, i)] += SHADOW_JITTER;
            }
            Cholesky::new(cov).ok_or_else(|| {
                Error::Numerical(
                    "shadowing covariance is not positive definite after jitter".into(),
                )
            })?
        }
    };
    Ok(chol.l() * xi * sigma)
}

/// Random pilot assignment: distinct pilots while they last (K ≤ τ_p),
/// uniform with reuse otherwise. Deterministic in the seed.
pub fn assign_pilots(k: usize, tau_p: usize, seed: u64) -> Vec<usize> {
    assert!(tau_p >= 1, "tau_p must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if k <= tau_p {
        let mut pool: Vec<usize> = (0..tau_p).collect();
        pool.shuffle(&mut rng);
        pool.truncate(k);
        pool
    } else {
        (0..k).map(|_| rng.random_range(0..tau_p)).collect()
    }
}

/// MMSE projection gains α and estimate mean-squares γ.
///
/// α_{k,m} = √p_k β_{k,m} / (Σ_{i: same pilot} p_i β_{i,m} + σ²_w),
/// γ_{k,m} = √p_k β_{k,m} α_{k,m}. Pilot cross-correlations are exactly the
/// pilot-equality indicator for an orthonormal pilot book with reuse.
pub fn estimate_quality(
    beta: &DMatrix<f64>,
    pilot_of: &[usize],
    pilot_power: &[f64],
    noise_power: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (k_users, m_aps) = beta.shape();
    assert_eq!(pilot_of.len(), k_users);
    assert_eq!(pilot_power.len(), k_users);
    let num_pilots = pilot_of.iter().max().map_or(0, |&p| p + 1);
    let mut alpha = DMatrix::zeros(k_users, m_aps);
    let mut gamma = DMatrix::zeros(k_users, m_aps);
    let mut pilot_sum = vec![0.0; num_pilots];
    for m in 0..m_aps {
        pilot_sum.iter_mut().for_each(|s| *s = 0.0);
        for i in 0..k_users {
            pilot_sum[pilot_of[i]] += pilot_power[i] * beta[(i, m)];
        }
        for k in 0..k_users {
            let den = pilot_sum[pilot_of[k]] + noise_power;
            let a = pilot_power[k].sqrt() * beta[(k, m)] / den;
            alpha[(k, m)] = a;
            gamma[(k, m)] = pilot_power[k].sqrt() * beta[(k, m)] * a;
        }
    }
    (alpha, gamma)
}

/// Fractional power control: η_k = min(P_max, P_0 ζ_k^{−κ}) with
/// ζ_k = sqrt(Σ_{m ∈ serving set} β_{k,m}).
pub fn fpc_powers(
    beta: &DMatrix<f64>,
    serving_sets: &[Vec<usize>],
    config: &SimConfig,
) -> Result<Vec<f64>> {
    serving_sets
        .iter()
        .enumerate()
        .map(|(k, set)| {
            if set.is_empty() {
                return Err(Error::Contract(format!(
                    "user {k} has an empty serving set in power control"
                )));
            }
            let zeta = set.iter().map(|&m| beta[(k, m)]).sum::<f64>().sqrt();
            Ok(config.p_max_w.min(config.p0_w * zeta.powf(-config.kappa)))
        })
        .collect()
}

/// Assemble the full per-drop statistics: β from pathloss and shadowing,
/// random pilots, noise power, maximum-power pilots, and the MMSE gains.
pub fn build_stats(
    layout: &NetworkLayout,
    config: &SimConfig,
    shadow_seed: u64,
    pilot_seed: u64,
) -> Result<ChannelStats> {
    let k = layout.user_positions.len();
    let m = layout.ap_positions.len();
    let shadow = correlated_shadowing(layout, config, shadow_seed)?;
    let beta = DMatrix::from_fn(k, m, |ki, mi| {
        let d = wrap_distance(layout.user_positions[ki], layout.ap_positions[mi], layout.side);
        10f64.powf((pathloss_db(d, config.carrier_ghz) + shadow[(ki, mi)]) / 10.0)
    });
    let pilot_of = assign_pilots(k, config.tau_p, pilot_seed);
    let noise = noise_power(config.noise_psd_dbm_hz, config.bandwidth_hz, config.noise_figure_db);
    // every user trains at maximum power: p_k = τ_p · P_max
    let pilot_power = vec![config.tau_p as f64 * config.p_max_w; k];
    let (alpha, gamma) = estimate_quality(&beta, &pilot_of, &pilot_power, noise);
    Ok(ChannelStats {
        beta,
        gamma,
        alpha,
        pilot_of,
        noise_power: noise,
        pilot_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::drop_network;
    use approx::assert_relative_eq;

    #[test]
    fn pathloss_matches_hand_evaluation() {
        // frozen from -36.7 log10(d) - 22.7 - 26 log10(f_c)
        assert_relative_eq!(pathloss_db(100.0, 1.9), -103.34759362477357, max_relative = 1e-14);
        assert_relative_eq!(pathloss_db(1000.0, 1.9), -140.04759362477355, max_relative = 1e-14);
        // both log terms vanish
        assert_relative_eq!(pathloss_db(1.0, 1.0), -22.7, max_relative = 1e-14);
    }

    #[test]
    fn pathloss_clamps_tiny_distances() {
        assert_eq!(pathloss_db(0.01, 1.9), pathloss_db(1.0, 1.9));
        assert_eq!(pathloss_db(0.0, 1.9), pathloss_db(1.0, 1.9));
    }

    #[test]
    fn noise_power_matches_hand_evaluation() {
        // -174 dBm/Hz over 20 MHz with a 9 dB noise figure ≈ -91.99 dBm
        assert_relative_eq!(
            noise_power(-174.0, 2e7, 9.0),
            6.324555320336759e-13,
            max_relative = 1e-12
        );
        // unit bandwidth, no noise figure: 10^(-20.4) W
        assert_relative_eq!(noise_power(-174.0, 1.0, 0.0), 10f64.powf(-20.4), max_relative = 1e-12);
    }

    #[test]
    fn doubling_bandwidth_adds_three_db() {
        let a = noise_power(-174.0, 1e7, 9.0);
        let b = noise_power(-174.0, 2e7, 9.0);
        assert_relative_eq!(10.0 * (b / a).log10(), 3.010299956639812, max_relative = 1e-12);
    }

    fn small_config() -> SimConfig {
        SimConfig {
            m: 6,
            k: 4,
            n_clusters: 1,
            l: 3,
            tau_p: 2,
            ..SimConfig::default()
        }
    }

    #[test]
    fn zero_sigma_gives_zero_shadowing() {
        let mut config = small_config();
        config.shadow_sigma_db = 0.0;
        let layout = drop_network(&config, 5).unwrap();
        let z = correlated_shadowing(&layout, &config, 9).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn coincident_aps_share_their_shadowing_column() {
        // δ=1 puts all the variance on the AP component; two APs at the same
        // position are perfectly correlated, so every user sees equal columns.
        let mut config = small_config();
        config.shadow_split = 1.0;
        let mut layout = drop_network(&config, 5).unwrap();
        layout.ap_positions[1] = layout.ap_positions[0];
        let z = correlated_shadowing(&layout, &config, 11).unwrap();
        for k in 0..config.k {
            // jitter fallback leaves a ~1e-5 residue
            assert_relative_eq!(z[(k, 0)], z[(k, 1)], epsilon = 1e-3);
        }
    }

    #[test]
    fn shadowing_variance_matches_sigma() {
        // Monte-Carlo estimate of the model's own variance over 10^4 drawings
        let config = small_config();
        let layout = drop_network(&config, 1).unwrap();
        let drops = 10_000;
        let mut sums = DMatrix::zeros(config.k, config.m);
        let mut sq_sums = DMatrix::zeros(config.k, config.m);
        for i in 0..drops {
            let z = correlated_shadowing(&layout, &config, 1000 + i).unwrap();
            sums += &z;
            sq_sums += z.map(|v| v * v);
        }
        let n = drops as f64;
        let target = config.shadow_sigma_db * config.shadow_sigma_db;
        for k in 0..config.k {
            for m in 0..config.m {
                let mean = sums[(k, m)] / n;
                let var = sq_sums[(k, m)] / n - mean * mean;
                assert!(
                    (var - target).abs() / target < 0.05,
                    "var[{k},{m}] = {var}, want ≈ {target}"
                );
            }
        }
    }

    #[test]
    fn pilots_are_distinct_when_they_fit() {
        let pilots = assign_pilots(16, 16, 3);
        let mut sorted = pilots.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn pilots_reuse_when_oversubscribed() {
        let pilots = assign_pilots(40, 16, 3);
        assert_eq!(pilots.len(), 40);
        assert!(pilots.iter().all(|&p| p < 16));
        let mut counts = [0usize; 16];
        for &p in &pilots {
            counts[p] += 1;
        }
        assert!(counts.iter().any(|&c| c > 1), "40 users over 16 pilots must collide");
    }

    #[test]
    fn single_user_gets_a_single_pilot() {
        let pilots = assign_pilots(1, 4, 0);
        assert_eq!(pilots.len(), 1);
        assert!(pilots[0] < 4);
    }

    #[test]
    fn pilot_assignment_is_deterministic() {
        assert_eq!(assign_pilots(40, 16, 3), assign_pilots(40, 16, 3));
        assert_ne!(assign_pilots(40, 16, 3), assign_pilots(40, 16, 4));
    }

    #[test]
    fn single_user_gamma_formula() {
        // γ = p β² / (p β + σ²) < β
        let beta = DMatrix::from_element(1, 1, 2e-10);
        let (p, sigma) = (1.6, 6.3e-13);
        let (alpha, gamma) = estimate_quality(&beta, &[0], &[p], sigma);
        let want = p * 2e-10 * 2e-10 / (p * 2e-10 + sigma);
        assert_relative_eq!(gamma[(0, 0)], want, max_relative = 1e-14);
        assert!(gamma[(0, 0)] < beta[(0, 0)]);
        assert_relative_eq!(alpha[(0, 0)], p.sqrt() * 2e-10 / (p * 2e-10 + sigma), max_relative = 1e-14);
    }

    #[test]
    fn shared_pilot_doubles_the_denominator() {
        // two users, same pilot, equal p and β: γ = p β² / (2 p β + σ²)
        let b = 5e-11;
        let beta = DMatrix::from_element(2, 1, b);
        let (p, sigma) = (1.6, 6.3e-13);
        let (_, gamma) = estimate_quality(&beta, &[0, 0], &[p, p], sigma);
        let want = p * b * b / (2.0 * p * b + sigma);
        assert_relative_eq!(gamma[(0, 0)], want, max_relative = 1e-14);
        assert_relative_eq!(gamma[(1, 0)], want, max_relative = 1e-14);
    }

    #[test]
    fn orthogonal_pilots_keep_only_the_own_term() {
        let b = 5e-11;
        let beta = DMatrix::from_element(2, 1, b);
        let (p, sigma) = (1.6, 6.3e-13);
        let (_, gamma) = estimate_quality(&beta, &[0, 1], &[p, p], sigma);
        let want = p * b * b / (p * b + sigma);
        assert_relative_eq!(gamma[(0, 0)], want, max_relative = 1e-14);
    }

    #[test]
    fn gamma_stays_below_beta_on_random_instances() {
        let config = small_config();
        for seed in 0..20 {
            let layout = drop_network(&config, seed).unwrap();
            let stats = build_stats(&layout, &config, seed + 100, seed + 200).unwrap();
            for k in 0..config.k {
                for m in 0..config.m {
                    let (g, b) = (stats.gamma[(k, m)], stats.beta[(k, m)]);
                    assert!(g > 0.0 && g < b, "γ={g} must sit in (0, β={b})");
                }
            }
        }
    }

    #[test]
    fn gamma_grows_with_own_pilot_power() {
        let beta = DMatrix::from_row_slice(2, 2, &[4e-11, 1e-11, 2e-11, 8e-11]);
        let sigma = 6.3e-13;
        let mut last = 0.0;
        for step in 1..=5 {
            let p_own = 0.4 * step as f64;
            let (_, gamma) = estimate_quality(&beta, &[0, 0], &[p_own, 1.6], sigma);
            assert!(gamma[(0, 0)] > last, "γ must be non-decreasing in p_k");
            last = gamma[(0, 0)];
        }
    }

    #[test]
    fn fpc_matches_hand_evaluation() {
        // min(0.1, 1e-4 · (1e-6)^-0.5) = min(0.1, 0.1) → clipped at P_max
        let config = SimConfig { kappa: 0.5, ..SimConfig::default() };
        let beta = DMatrix::from_element(1, 1, 1e-12); // ζ = 1e-6
        let eta = fpc_powers(&beta, &[vec![0]], &config).unwrap();
        assert_relative_eq!(eta[0], 0.1, max_relative = 1e-12);
    }

    #[test]
    fn fpc_with_zero_kappa_ignores_the_channel() {
        let config = SimConfig { kappa: 0.0, ..SimConfig::default() };
        let beta = DMatrix::from_row_slice(2, 1, &[1e-9, 1e-14]);
        let eta = fpc_powers(&beta, &[vec![0], vec![0]], &config).unwrap();
        assert_eq!(eta[0], config.p_max_w.min(config.p0_w));
        assert_eq!(eta[0], eta[1]);
    }

    #[test]
    fn fpc_vanishes_for_huge_gains() {
        let config = SimConfig { kappa: 0.5, ..SimConfig::default() };
        let beta = DMatrix::from_element(1, 1, 1e12); // ζ = 1e6
        let eta = fpc_powers(&beta, &[vec![0]], &config).unwrap();
        assert!(eta[0] < 1e-6 && eta[0] > 0.0);
    }

    #[test]
    fn fpc_rejects_empty_serving_set() {
        let config = SimConfig::default();
        let beta = DMatrix::from_element(1, 1, 1e-10);
        let err = fpc_powers(&beta, &[vec![]], &config).unwrap_err();
        assert!(matches!(err, Error::Contract(_)), "{err}");
    }

    #[test]
    fn fpc_output_is_positive_and_capped() {
        let config = small_config();
        for seed in 0..10 {
            let layout = drop_network(&config, seed).unwrap();
            let stats = build_stats(&layout, &config, seed, seed).unwrap();
            let sets: Vec<Vec<usize>> = (0..config.k).map(|_| (0..config.m).collect()).collect();
            for &eta in fpc_powers(&stats.beta, &sets, &config).unwrap().iter() {
                assert!(eta > 0.0 && eta <= config.p_max_w);
            }
        }
    }

    #[test]
    fn assembled_beta_is_positive() {
        let config = small_config();
        let layout = drop_network(&config, 2).unwrap();
        let stats = build_stats(&layout, &config, 3, 4).unwrap();
        assert!(stats.beta.iter().all(|&b| b > 0.0));
    }
}
