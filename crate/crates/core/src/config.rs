//! Simulation configuration: every tunable of a run, its defaults, and the
//! flat `key = value` config-file format.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Serving/combining scheme identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Position-based virtual clustering with Hungarian user association.
    Pbvc,
    /// Full cell-free: every AP decodes every user.
    Fcf,
    /// User-centric: each user decoded by its L strongest-gain APs.
    Uc,
    /// LSF decoding with optimal weights over all APs.
    Lsfd,
    /// LSF decoding restricted to the Hungarian-assigned virtual cluster.
    LsfdPbvc,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::Pbvc, Scheme::Fcf, Scheme::Uc, Scheme::Lsfd, Scheme::LsfdPbvc];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Pbvc => "pbvc",
            Scheme::Fcf => "fcf",
            Scheme::Uc => "uc",
            Scheme::Lsfd => "lsfd",
            Scheme::LsfdPbvc => "lsfd_pbvc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pbvc" => Ok(Scheme::Pbvc),
            "fcf" => Ok(Scheme::Fcf),
            "uc" => Ok(Scheme::Uc),
            "lsfd" => Ok(Scheme::Lsfd),
            "lsfd_pbvc" => Ok(Scheme::LsfdPbvc),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected pbvc, fcf, uc, lsfd or lsfd_pbvc)"
            ))),
        }
    }
}

/// Parse a comma-separated scheme list such as `pbvc,fcf,uc`.
pub fn parse_scheme_list(s: &str) -> Result<Vec<Scheme>> {
    let schemes: Vec<Scheme> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(Scheme::from_str)
        .collect::<Result<_>>()?;
    if schemes.is_empty() {
        return Err(Error::Config("scheme list is empty".into()));
    }
    Ok(schemes)
}

/// Every tunable of a simulation run.
///
/// Matches the config-file keys one to one; see [`SimConfig::from_file`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Number of access points.
    pub m: usize,
    /// Number of single-antenna users.
    pub k: usize,
    /// Number of cell-centric clusters; must be a perfect square for the
    /// grid partition.
    pub n_clusters: usize,
    /// Antennas per AP.
    pub n_ap: usize,
    /// Virtual-cluster size (also the user-centric set size).
    pub l: usize,
    /// Number of orthogonal pilots (= pilot sequence length).
    pub tau_p: usize,
    /// Coherence block length, samples.
    pub tau_c: usize,
    /// Uplink data samples per coherence block. Defaults to `tau_c - tau_p`
    /// when not set explicitly.
    pub tau_u: usize,
    /// System bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Carrier frequency, GHz.
    pub carrier_ghz: f64,
    /// Deployment square side, meters.
    pub side_m: f64,
    /// AP antenna height, meters.
    pub ap_height_m: f64,
    /// User antenna height, meters.
    pub user_height_m: f64,
    /// Noise power spectral density, dBm/Hz.
    pub noise_psd_dbm_hz: f64,
    /// Receiver noise figure, dB.
    pub noise_figure_db: f64,
    /// Shadow-fading standard deviation, dB.
    pub shadow_sigma_db: f64,
    /// Shadow-fading decorrelation distance, meters.
    pub shadow_corr_distance_m: f64,
    /// AP/user split of the shadowing variance, in [0, 1].
    pub shadow_split: f64,
    /// Maximum uplink transmit power, watts.
    pub p_max_w: f64,
    /// Fractional-power-control target power, watts.
    pub p0_w: f64,
    /// Fractional-power-control compensation exponent, in [0, 1].
    pub kappa: f64,
    /// Schemes to run, in output order.
    pub schemes: Vec<Scheme>,
    /// Monte-Carlo drops per sweep point.
    pub drops: usize,
    /// Master seed; all per-drop randomness derives from it.
    pub seed: u64,
    /// Replicate VC columns in the matching when K exceeds the number of
    /// virtual clusters, letting users share a VC. Off by default.
    pub allow_vc_sharing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            m: 100,
            k: 40,
            n_clusters: 4,
            n_ap: 4,
            l: 20,
            tau_p: 16,
            tau_c: 200,
            tau_u: 184,
            bandwidth_hz: 20e6,
            carrier_ghz: 1.9,
            side_m: 1000.0,
            ap_height_m: 10.0,
            user_height_m: 1.65,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            shadow_sigma_db: 4.0,
            shadow_corr_distance_m: 10.0,
            shadow_split: 0.5,
            p_max_w: 0.1,
            p0_w: 1e-4,
            kappa: 0.5,
            schemes: Scheme::ALL.to_vec(),
            drops: 200,
            seed: 1,
            allow_vc_sharing: false,
        }
    }
}

impl SimConfig {
    /// Check all cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        fn fail(msg: String) -> Result<()> {
            Err(Error::Config(msg))
        }
        // NaN fails both predicates and is rejected alongside the sign checks
        let positive = |v: f64| v > 0.0;
        let non_negative = |v: f64| v >= 0.0;
        if self.m < 1 {
            return fail("M must be at least 1".into());
        }
        if self.k < 1 {
            return fail("K must be at least 1".into());
        }
        if self.n_ap < 1 {
            return fail("N_AP must be at least 1".into());
        }
        if self.n_clusters < 1 {
            return fail("N must be at least 1".into());
        }
        if self.l < 1 || self.l > self.m {
            return fail(format!("L={} must lie in 1..=M={}", self.l, self.m));
        }
        if self.tau_p < 1 {
            return fail("tau_p must be at least 1".into());
        }
        if self.tau_p >= self.tau_c {
            return fail(format!(
                "tau_p={} must be smaller than tau_c={}",
                self.tau_p, self.tau_c
            ));
        }
        if self.tau_u < 1 || self.tau_u > self.tau_c - self.tau_p {
            return fail(format!(
                "tau_u={} must lie in 1..=tau_c-tau_p={}",
                self.tau_u,
                self.tau_c - self.tau_p
            ));
        }
        if !positive(self.bandwidth_hz) {
            return fail("bandwidth must be positive".into());
        }
        if !positive(self.carrier_ghz) {
            return fail("carrier frequency must be positive".into());
        }
        if !positive(self.side_m) {
            return fail("area side must be positive".into());
        }
        if !positive(self.p_max_w) || !positive(self.p0_w) {
            return fail("transmit powers must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return fail(format!("kappa={} must lie in [0, 1]", self.kappa));
        }
        if !(0.0..=1.0).contains(&self.shadow_split) {
            return fail(format!("shadow_split={} must lie in [0, 1]", self.shadow_split));
        }
        if !non_negative(self.shadow_sigma_db) {
            return fail("shadow_sigma_db must be non-negative".into());
        }
        if !positive(self.shadow_corr_distance_m) {
            return fail("shadow_corr_distance_m must be positive".into());
        }
        if self.drops < 1 {
            return fail("drops must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return fail("at least one scheme must be selected".into());
        }
        Ok(())
    }

    /// Prelog factor tau_u / tau_c.
    pub fn prelog(&self) -> f64 {
        self.tau_u as f64 / self.tau_c as f64
    }

    /// Set one field from its config-file key. Unknown keys are rejected.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| {
                Error::Config(format!("invalid value '{value}' for key '{key}'"))
            })
        }
        let value = value.trim();
        match key {
            "m" => self.m = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "n_clusters" => self.n_clusters = num(key, value)?,
            "n_ap" => self.n_ap = num(key, value)?,
            "l" => self.l = num(key, value)?,
            "tau_p" => self.tau_p = num(key, value)?,
            "tau_c" => self.tau_c = num(key, value)?,
            "tau_u" => self.tau_u = num(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = num(key, value)?,
            "carrier_ghz" => self.carrier_ghz = num(key, value)?,
            "side_m" => self.side_m = num(key, value)?,
            "ap_height_m" => self.ap_height_m = num(key, value)?,
            "user_height_m" => self.user_height_m = num(key, value)?,
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz = num(key, value)?,
            "noise_figure_db" => self.noise_figure_db = num(key, value)?,
            "shadow_sigma_db" => self.shadow_sigma_db = num(key, value)?,
            "shadow_corr_distance_m" => self.shadow_corr_distance_m = num(key, value)?,
            "shadow_split" => self.shadow_split = num(key, value)?,
            "p_max_w" => self.p_max_w = num(key, value)?,
            "p0_w" => self.p0_w = num(key, value)?,
            "kappa" => self.kappa = num(key, value)?,
            "schemes" => self.schemes = parse_scheme_list(value)?,
            "drops" => self.drops = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "allow_vc_sharing" => self.allow_vc_sharing = num(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown config key '{other}'")))
            }
        }
        Ok(())
    }

    /// Parse the flat config-file format: one `key = value` per line,
    /// `#` starts a comment. Keys not set keep their defaults; `tau_u`
    /// defaults to `tau_c - tau_p` unless given explicitly.
    pub fn from_config_text(text: &str) -> Result<SimConfig> {
        let mut config = SimConfig::default();
        let mut tau_u_set = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            if key == "tau_u" {
                tau_u_set = true;
            }
            config.apply_kv(key, value)?;
        }
        if !tau_u_set {
            if config.tau_c <= config.tau_p {
                return Err(Error::Config(format!(
                    "tau_p={} must be smaller than tau_c={}",
                    config.tau_p, config.tau_c
                )));
            }
            config.tau_u = config.tau_c - config.tau_p;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<SimConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SimConfig::from_config_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let config = SimConfig::default();
        config.validate().unwrap();
        assert_eq!(config.tau_u, config.tau_c - config.tau_p);
        assert!((config.prelog() - 0.92).abs() < 1e-15);
    }

    #[test]
    fn parses_full_file_with_comments() {
        let text = "\
# experiment setup
m = 24
k = 8          # users
n_clusters = 4
l = 6
tau_p = 4
schemes = pbvc, fcf
drops = 3
seed = 99
shadow_sigma_db = 0
";
        let config = SimConfig::from_config_text(text).unwrap();
        assert_eq!(config.m, 24);
        assert_eq!(config.k, 8);
        assert_eq!(config.l, 6);
        assert_eq!(config.schemes, vec![Scheme::Pbvc, Scheme::Fcf]);
        assert_eq!(config.drops, 3);
        assert_eq!(config.seed, 99);
        assert_eq!(config.shadow_sigma_db, 0.0);
        // tau_u recomputed from the overridden tau_p
        assert_eq!(config.tau_u, 196);
    }

    #[test]
    fn rejects_unknown_key() {
        let err = SimConfig::from_config_text("bogus_key = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(err.to_string().contains("bogus_key"));
    }

    #[test]
    fn rejects_malformed_line() {
        let err = SimConfig::from_config_text("just words\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn rejects_invalid_combinations() {
        let default = SimConfig::default();
        let bad = [
            SimConfig { l: default.m + 1, ..default.clone() },
            SimConfig { tau_p: default.tau_c, ..default.clone() },
            SimConfig { kappa: 1.5, ..default.clone() },
            SimConfig { tau_u: default.tau_c - default.tau_p + 1, ..default.clone() },
            SimConfig { bandwidth_hz: f64::NAN, ..default.clone() },
            SimConfig { p0_w: 0.0, ..default.clone() },
        ];
        for config in bad {
            assert!(config.validate().is_err(), "{config:?} must be rejected");
        }
    }

    #[test]
    fn explicit_tau_u_is_kept() {
        let config = SimConfig::from_config_text("tau_u = 100\n").unwrap();
        assert_eq!(config.tau_u, 100);
    }

    #[test]
    fn scheme_names_round_trip() {
        for scheme in Scheme::ALL {
            assert_eq!(scheme.name().parse::<Scheme>().unwrap(), scheme);
        }
    }
}
