//! Suite configuration: TOML `key = value` sections with defaults pinned to
//! the acceptance thresholds. Every resolved parameter is echoed back into
//! the manifest so no run depends on hidden defaults.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub run: RunSection,
    pub d1_growth: D1GrowthConfig,
    pub d2_growth: D2GrowthConfig,
    pub renewal_flux: RenewalFluxConfig,
    pub circle_flux: CircleFluxConfig,
    pub harmonic: HarmonicConfig,
    pub solver: SolverConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            run: RunSection::default(),
            d1_growth: D1GrowthConfig::default(),
            d2_growth: D2GrowthConfig::default(),
            renewal_flux: RenewalFluxConfig::default(),
            circle_flux: CircleFluxConfig::default(),
            harmonic: HarmonicConfig::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub seed: u64,
    pub jobs: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: 7, jobs: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol: f64,
    pub dense_threshold: usize,
    pub iter_budget_factor: f64,
    pub packed_budget: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-10, dense_threshold: 2000, iter_budget_factor: 10.0, packed_budget: 9000 }
    }
}

/// One-dimensional growth-law suite (Poisson points, complete graph).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct D1GrowthConfig {
    pub lambda: f64,
    pub seeds: usize,
    pub n_list: Vec<usize>,
    /// Extra half-width beyond the largest box.
    pub box_margin: f64,
    /// Power-fit exponent band for alpha = 3.
    pub exponent_band_alpha3: (f64, f64),
    /// Power-fit exponent band for alpha = 1.5.
    pub exponent_band_alpha15: (f64, f64),
    /// Allowed max/min spread of `R_n / log n` for alpha = 1.
    pub log_ratio_factor_alpha1: f64,
    /// Boxes entering the alpha = 1 ratio check.
    pub log_ratio_min_n: usize,
}

impl Default for D1GrowthConfig {
    fn default() -> Self {
        D1GrowthConfig {
            lambda: 1.0,
            seeds: 16,
            n_list: vec![64, 128, 256, 512, 1024, 2048, 4096],
            box_margin: 512.0,
            exponent_band_alpha3: (0.8, 1.2),
            exponent_band_alpha15: (0.35, 0.65),
            log_ratio_factor_alpha1: 2.0,
            log_ratio_min_n: 128,
        }
    }
}

/// Two-dimensional growth suite: truncated sparse profiles plus the exact
/// chain-bound and moment-probe checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct D2GrowthConfig {
    pub alpha: f64,
    pub n_list: Vec<usize>,
    pub box_margin: usize,
    pub cut: f64,
    pub ppp_seeds: usize,
    pub log_ratio_factor: f64,
    /// Box for the exact pipeline-monotonicity checks (dense solves).
    pub exact_check_box: usize,
    pub exact_check_seeds: usize,
    /// Moment probe configuration (alpha = 2 quantities).
    pub probe_i_list: Vec<usize>,
    pub probe_trials: usize,
    pub probe_box: i64,
    pub probe_mean_ratio_factor: f64,
    /// Cap on the log-log growth slope of the fourth central moment in `i`
    /// (the proven bound is quadratic).
    pub probe_fourth_slope_max: f64,
}

impl Default for D2GrowthConfig {
    fn default() -> Self {
        D2GrowthConfig {
            alpha: 3.0,
            n_list: vec![16, 32, 64, 128, 256],
            box_margin: 16,
            cut: 4.5,
            ppp_seeds: 3,
            log_ratio_factor: 2.0,
            exact_check_box: 20,
            exact_check_seeds: 2,
            probe_i_list: vec![8, 16, 32, 64],
            probe_trials: 160,
            probe_box: 128,
            probe_mean_ratio_factor: 4.0,
            probe_fourth_slope_max: 2.5,
        }
    }
}

/// One-dimensional renewal flux suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RenewalFluxConfig {
    pub delta: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub points: usize,
    pub divergence_tol: f64,
    /// Partial-sum agreement: `E_N` within this fraction of `E_{2N}`.
    pub cauchy_fraction: f64,
    pub limit_deltas: Vec<f64>,
    pub limit_n: usize,
    pub limit_tol: f64,
}

impl Default for RenewalFluxConfig {
    fn default() -> Self {
        RenewalFluxConfig {
            delta: 1.3,
            alpha: 0.5,
            lambda: 1.0,
            points: 20_000,
            divergence_tol: 1e-12,
            cauchy_fraction: 0.01,
            limit_deltas: vec![1.2, 1.5, 1.8],
            limit_n: 100_000,
            limit_tol: 0.05,
        }
    }
}

/// Circle flux suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CircleFluxConfig {
    pub n_max: usize,
    pub delta: f64,
    pub alpha: f64,
    pub theta_samples: usize,
    pub recursion_tol: f64,
    pub slope_fit_range: (usize, usize),
    pub slope_rel_tol: f64,
    pub contrapositive_delta: f64,
}

impl Default for CircleFluxConfig {
    fn default() -> Self {
        CircleFluxConfig {
            n_max: 200,
            delta: 1.9,
            alpha: 1.5,
            theta_samples: 16,
            recursion_tol: 1e-10,
            slope_fit_range: (50, 200),
            slope_rel_tol: 0.10,
            contrapositive_delta: 1.6,
        }
    }
}

/// Harmonic-analysis suite: type table, growth slopes, shell bands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HarmonicConfig {
    pub t_exponents: Vec<i32>,
    pub trunc_n_list: Vec<usize>,
    pub log_slope_band_alpha1: (f64, f64),
    pub power_slope_band_alpha15: (f64, f64),
    pub band_max_n: usize,
    pub band_alphas: Vec<f64>,
    pub band_constant_limit: f64,
}

impl Default for HarmonicConfig {
    fn default() -> Self {
        HarmonicConfig {
            t_exponents: vec![2, 3, 4, 5, 6],
            trunc_n_list: vec![16, 32, 64, 128, 256, 512, 1024, 2048, 4096],
            log_slope_band_alpha1: (0.8, 1.2),
            power_slope_band_alpha15: (0.4, 0.6),
            band_max_n: 200,
            band_alphas: vec![0.5, 1.0, 2.0],
            band_constant_limit: 10.0,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> anyhow::Result<Config> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Config> {
        Config::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Full echo of every resolved parameter.
    pub fn echo(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_partial_override() {
        let cfg = Config::default();
        let echoed = cfg.echo();
        let back = Config::from_toml(&echoed).unwrap();
        assert_eq!(back.d1_growth.n_list, cfg.d1_growth.n_list);
        let partial = "[d1_growth]\nseeds = 4\n";
        let cfg2 = Config::from_toml(partial).unwrap();
        assert_eq!(cfg2.d1_growth.seeds, 4);
        assert_eq!(cfg2.d1_growth.lambda, 1.0);
        assert_eq!(cfg2.circle_flux.n_max, 200);
    }
}
