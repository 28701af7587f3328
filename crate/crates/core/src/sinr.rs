//! Uplink SINR evaluation under maximum-ratio combining: the closed-form
//! bound for an arbitrary serving set, LSF-weighted decoding with optimal
//! per-user weights, the rate mapping, and a Monte-Carlo
//! use-and-then-forget oracle that validates the closed form by sampling the
//! per-symbol transmission chain.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::ChannelStats;
use crate::config::SimConfig;
use crate::error::{Error, Result};

const LSFD_JITTER: f64 = 1e-12;

/// Per-user SINR and rate for one scheme evaluation.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// Linear SINR per user.
    pub sinr: Vec<f64>,
    /// Rate per user, bits/s.
    pub rate: Vec<f64>,
    /// Sum over users, bits/s.
    pub sum_rate: f64,
}

/// Closed-form uplink SINR of user `k` when the APs in `serving_set` decode
/// it with MRC on MMSE channel estimates:
///
/// ```text
///             η_k N_AP (Σ_m γ_{k,m})²
/// ─────────────────────────────────────────────────────────────────────
/// Σ_ℓ η_ℓ Σ_m β_{ℓ,m} γ_{k,m}
///   + Σ_{ℓ≠k, same pilot} η_ℓ N_AP (Σ_m γ_{k,m} β_{ℓ,m}/β_{k,m})²
///   + σ²_w Σ_m γ_{k,m}
/// ```
///
/// with all AP sums over the serving set only.
pub fn sinr_closed_form(
    k: usize,
    serving_set: &[usize],
    stats: &ChannelStats,
    eta: &[f64],
    n_ap: usize,
) -> Result<f64> {
    if serving_set.is_empty() {
        return Err(Error::Contract(format!("user {k}: empty serving set")));
    }
    let n_ap = n_ap as f64;
    let k_users = stats.num_users();
    debug_assert_eq!(eta.len(), k_users, "one transmit power per user");
    let gamma_sum: f64 = serving_set.iter().map(|&m| stats.gamma[(k, m)]).sum();
    let numerator = eta[k] * n_ap * gamma_sum * gamma_sum;

    let mut interference = 0.0;
    for (l, &eta_l) in eta.iter().enumerate().take(k_users) {
        let s: f64 = serving_set
            .iter()
            .map(|&m| stats.beta[(l, m)] * stats.gamma[(k, m)])
            .sum();
        interference += eta_l * s;
    }
    let mut contamination = 0.0;
    for (l, &eta_l) in eta.iter().enumerate().take(k_users) {
        if l != k && stats.pilot_of[l] == stats.pilot_of[k] {
            let s: f64 = serving_set
                .iter()
                .map(|&m| stats.gamma[(k, m)] * stats.beta[(l, m)] / stats.beta[(k, m)])
                .sum();
            contamination += eta_l * n_ap * s * s;
        }
    }
    let noise = stats.noise_power * gamma_sum;
    Ok(numerator / (interference + contamination + noise))
}

/// SINR of user `k` when the per-AP MR statistics over `weight_domain` are
/// combined with the given real weights (one per domain entry, in order).
/// Weights all equal to one reduce to [`sinr_closed_form`].
pub fn sinr_weighted(
    k: usize,
    weight_domain: &[usize],
    stats: &ChannelStats,
    eta: &[f64],
    n_ap: usize,
    weights: &[f64],
) -> Result<f64> {
    if weight_domain.is_empty() {
        return Err(Error::Contract(format!("user {k}: empty weight domain")));
    }
    if weights.len() != weight_domain.len() {
        return Err(Error::Contract(format!(
            "user {k}: {} weights for a domain of {} APs",
            weights.len(),
            weight_domain.len()
        )));
    }
    let n_ap = n_ap as f64;
    let k_users = stats.num_users();
    debug_assert_eq!(eta.len(), k_users, "one transmit power per user");
    let signal: f64 = weight_domain
        .iter()
        .zip(weights)
        .map(|(&m, &a)| a * stats.gamma[(k, m)])
        .sum();
    let numerator = eta[k] * n_ap * signal * signal;

    let mut denominator = 0.0;
    for (&m, &a) in weight_domain.iter().zip(weights) {
        let mut per_ap = stats.noise_power * stats.gamma[(k, m)];
        for (l, &eta_l) in eta.iter().enumerate().take(k_users) {
            per_ap += eta_l * stats.beta[(l, m)] * stats.gamma[(k, m)];
        }
        denominator += a * a * per_ap;
    }
    for (l, &eta_l) in eta.iter().enumerate().take(k_users) {
        if l != k && stats.pilot_of[l] == stats.pilot_of[k] {
            let s: f64 = weight_domain
                .iter()
                .zip(weights)
                .map(|(&m, &a)| a * stats.gamma[(k, m)] * stats.beta[(l, m)] / stats.beta[(k, m)])
                .sum();
            denominator += eta_l * n_ap * s * s;
        }
    }
    Ok(numerator / denominator)
}

/// Optimal LSF-decoding SINR of user `k` over `weight_domain`, with the
/// maximizing weight vector (aligned with the domain order).
///
/// The weighted SINR is a generalized Rayleigh quotient in the weights; the
/// maximizer is a* = C⁻¹b with b the per-AP useful-signal vector and C the
/// positive-definite denominator matrix, giving the SINR η_k N_AP bᵀC⁻¹b.
pub fn lsfd_sinr(
    k: usize,
    weight_domain: &[usize],
    stats: &ChannelStats,
    eta: &[f64],
    n_ap: usize,
) -> Result<(f64, Vec<f64>)> {
    if weight_domain.is_empty() {
        return Err(Error::Contract(format!("user {k}: empty weight domain")));
    }
    let d = weight_domain.len();
    let n_ap_f = n_ap as f64;
    let k_users = stats.num_users();
    debug_assert_eq!(eta.len(), k_users, "one transmit power per user");

    let b = DVector::from_fn(d, |i, _| stats.gamma[(k, weight_domain[i])]);
    let mut c_mat = DMatrix::zeros(d, d);
    for (i, &m) in weight_domain.iter().enumerate() {
        let mut diag = stats.noise_power * stats.gamma[(k, m)];
        for (l, &eta_l) in eta.iter().enumerate().take(k_users) {
            diag += eta_l * stats.beta[(l, m)] * stats.gamma[(k, m)];
        }
        c_mat[(i, i)] = diag;
    }
    for (l, &eta_l) in eta.iter().enumerate().take(k_users) {
        if l != k && stats.pilot_of[l] == stats.pilot_of[k] {
            let c_l = DVector::from_fn(d, |i, _| {
                let m = weight_domain[i];
                stats.gamma[(k, m)] * stats.beta[(l, m)] / stats.beta[(k, m)]
            });
            c_mat.ger(eta_l * n_ap_f, &c_l, &c_l, 1.0);
        }
    }

    // Solve in a diagonally scaled space for conditioning; the solution of
    // (C/s) a = b/s is exactly C⁻¹b, and the jitter retry acts at the scale
    // of the matrix.
    let scale = (0..d).map(|i| c_mat[(i, i)]).fold(0.0f64, f64::max);
    let scale_usable = scale.is_finite() && scale > 0.0;
    if !scale_usable {
        return Err(Error::Numerical(format!(
            "user {k}: degenerate LSFD denominator matrix"
        )));
    }
    let scaled = &c_mat / scale;
    let chol = match Cholesky::new(scaled.clone()) {
        Some(c) => c,
        None => {
            let mut jittered = scaled;
            for i in 0..d {
                jittered[(i, i)] += LSFD_JITTER;
            }
            Cholesky::new(jittered).ok_or_else(|| {
                Error::Numerical(format!(
                    "user {k}: LSFD denominator matrix is singular after jitter"
                ))
            })?
        }
    };
    let weights = chol.solve(&(&b / scale));
    let sinr = eta[k] * n_ap_f * b.dot(&weights);
    Ok((sinr, weights.iter().copied().collect()))
}

/// Map per-user SINRs to rates: R_k = (τ_u/τ_c) · W · log2(1 + SINR_k).
pub fn rate_from_sinr(sinr: &[f64], config: &SimConfig) -> RateReport {
    let factor = config.prelog() * config.bandwidth_hz;
    let rate: Vec<f64> = sinr
        .iter()
        .map(|&s| {
            debug_assert!(s >= 0.0, "SINR must be non-negative, got {s}");
            factor * (1.0 + s).log2()
        })
        .collect();
    let sum_rate = rate.iter().sum();
    RateReport {
        sinr: sinr.to_vec(),
        rate,
        sum_rate,
    }
}

/// Monte-Carlo use-and-then-forget SINR estimate for user `k`.
///
/// Each realization samples the fast fading towards every AP in the serving
/// set and the pilot noise, forms the MMSE estimates, and accumulates the
/// MR statistics of the per-symbol chain: the desired-signal inner product,
/// the per-interferer leakage, and the combined-noise power. All
/// expectations in the bound are then replaced by their sample means over
/// common random numbers:
///
/// ```text
/// η_k |E[DS]|² / (η_k var[DS] + Σ_{ℓ≠k} η_ℓ E[|I_ℓ|²] + σ²_w E[Σ_m ‖ĝ_{k,m}‖²])
/// ```
pub fn uatf_oracle(
    k: usize,
    serving_set: &[usize],
    stats: &ChannelStats,
    eta: &[f64],
    n_ap: usize,
    num_samples: usize,
    seed: u64,
) -> f64 {
    assert!(num_samples >= 1, "need at least one fading realization");
    assert!(!serving_set.is_empty(), "empty serving set");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_users = stats.num_users();
    let sqrt_p: Vec<f64> = stats.pilot_power.iter().map(|p| p.sqrt()).collect();
    let pilot_noise_sd = (stats.noise_power / 2.0).sqrt();

    let mut sum_ds = Complex64::ZERO;
    let mut sum_ds_sq = 0.0;
    let mut sum_leak_sq = vec![0.0; k_users];
    let mut sum_noise = 0.0;

    let mut g = vec![Complex64::ZERO; k_users * n_ap];
    let mut leak = vec![Complex64::ZERO; k_users];
    for _ in 0..num_samples {
        let mut ds = Complex64::ZERO;
        leak.iter_mut().for_each(|v| *v = Complex64::ZERO);
        let mut ghat_norm = 0.0;
        for &m in serving_set {
            for l in 0..k_users {
                let sd = (stats.beta[(l, m)] / 2.0).sqrt();
                for a in 0..n_ap {
                    g[l * n_ap + a] = Complex64::new(
                        sd * rng.sample::<f64, _>(StandardNormal),
                        sd * rng.sample::<f64, _>(StandardNormal),
                    );
                }
            }
            let alpha = stats.alpha[(k, m)];
            for a in 0..n_ap {
                // received pilot projected onto user k's sequence
                let mut y = Complex64::new(
                    pilot_noise_sd * rng.sample::<f64, _>(StandardNormal),
                    pilot_noise_sd * rng.sample::<f64, _>(StandardNormal),
                );
                for i in 0..k_users {
                    if stats.pilot_of[i] == stats.pilot_of[k] {
                        y += sqrt_p[i] * g[i * n_ap + a];
                    }
                }
                let ghat = alpha * y;
                let ghat_conj = ghat.conj();
                ds += ghat_conj * g[k * n_ap + a];
                for (l, leak_l) in leak.iter_mut().enumerate() {
                    if l != k {
                        *leak_l += ghat_conj * g[l * n_ap + a];
                    }
                }
                ghat_norm += ghat.norm_sqr();
            }
        }
        sum_ds += ds;
        sum_ds_sq += ds.norm_sqr();
        for l in 0..k_users {
            sum_leak_sq[l] += leak[l].norm_sqr();
        }
        sum_noise += stats.noise_power * ghat_norm;
    }

    let n = num_samples as f64;
    let mean_ds = sum_ds / n;
    let var_ds = (sum_ds_sq / n - mean_ds.norm_sqr()).max(0.0);
    let mut denominator = eta[k] * var_ds + sum_noise / n;
    for l in 0..k_users {
        if l != k {
            denominator += eta[l] * sum_leak_sq[l] / n;
        }
    }
    eta[k] * mean_ds.norm_sqr() / denominator
}
