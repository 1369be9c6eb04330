use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessMode {
    /// Rate splitting: a common stream decoded by all users plus private
    /// streams.
    Rsma,
    /// Baseline with the common stream disabled; all multi-user
    /// interference is treated as noise.
    Sdma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsitMode {
    Perfect,
    Partial,
}

/// Scenario constants. Power is linear and normalized to unit receiver
/// noise, so `power_total = 100` corresponds to 20 dB of transmit SNR.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_users: usize,
    pub power_total: f64,
    /// Antenna spacing in wavelengths.
    pub antenna_spacing: f64,
    pub user_weights: Vec<f64>,
    /// Minimum per-user average rate in bps/Hz (0 disables the constraint).
    pub qos_threshold: f64,
    /// Radar regularization weight.
    pub reg_lambda: f64,
    /// ADMM penalty.
    pub admm_penalty: f64,
    /// ADMM residual-norm stopping threshold.
    pub admm_tolerance: f64,
    /// Channel estimation quality exponent: error variance scales as
    /// `sigma_k^2 * power_total^(-csit_exponent)`.
    pub csit_exponent: f64,
    pub channel_variances: Vec<f64>,
    /// Conditional samples used by the sample average approximation.
    pub saa_samples: usize,
    pub access_mode: AccessMode,
    pub csit_mode: CsitMode,
    pub rng_seed: u64,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl SystemConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_tx < 1 {
            return Err(invalid("n_tx must be at least 1"));
        }
        if self.n_users < 1 {
            return Err(invalid("n_users must be at least 1"));
        }
        if !(self.power_total > 0.0) {
            return Err(invalid("power_total must be positive"));
        }
        if !(self.antenna_spacing > 0.0) {
            return Err(invalid("antenna_spacing must be positive"));
        }
        if self.user_weights.len() != self.n_users {
            return Err(invalid("user_weights must have one entry per user"));
        }
        if self.user_weights.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("user_weights must be positive"));
        }
        if self.qos_threshold < 0.0 {
            return Err(invalid("qos_threshold must be nonnegative"));
        }
        if !(self.reg_lambda > 0.0) {
            return Err(invalid("reg_lambda must be positive"));
        }
        if !(self.admm_penalty > 0.0) {
            return Err(invalid("admm_penalty must be positive"));
        }
        if !(self.admm_tolerance > 0.0) {
            return Err(invalid("admm_tolerance must be positive"));
        }
        if self.csit_exponent < 0.0 {
            return Err(invalid("csit_exponent must be nonnegative"));
        }
        if self.channel_variances.len() != self.n_users {
            return Err(invalid("channel_variances must have one entry per user"));
        }
        if self.channel_variances.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("channel_variances must be positive"));
        }
        if self.saa_samples < 1 {
            return Err(invalid("saa_samples must be at least 1"));
        }
        for (k, &var) in self.channel_variances.iter().enumerate() {
            if self.error_variance(k) > var + 1e-15 {
                return Err(invalid(format!(
                    "estimation error variance exceeds channel variance for user {k}; \
                     increase power_total or csit_exponent"
                )));
            }
        }
        Ok(())
    }

    /// Estimation error variance for user `k`; zero under perfect CSIT.
    pub fn error_variance(&self, user: usize) -> f64 {
        match self.csit_mode {
            CsitMode::Perfect => 0.0,
            CsitMode::Partial => {
                self.channel_variances[user] * self.power_total.powf(-self.csit_exponent)
            }
        }
    }

    pub fn error_variances(&self) -> Vec<f64> {
        (0..self.n_users).map(|k| self.error_variance(k)).collect()
    }

    /// Total number of precoder columns (common + private). The common
    /// column exists in both modes and is identically zero under SDMA.
    pub fn n_streams(&self) -> usize {
        self.n_users + 1
    }

    /// Per-antenna power target.
    pub fn per_antenna_power(&self) -> f64 {
        self.power_total / self.n_tx as f64
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_tx: 4,
            n_users: 2,
            power_total: 100.0,
            antenna_spacing: 0.5,
            user_weights: vec![0.5, 0.5],
            qos_threshold: 1.0,
            reg_lambda: 1e-3,
            admm_penalty: 1.0,
            admm_tolerance: 1e-2,
            csit_exponent: 0.6,
            channel_variances: vec![1.0, 1.0],
            saa_samples: 32,
            access_mode: AccessMode::Rsma,
            csit_mode: CsitMode::Partial,
            rng_seed: 1,
        }
    }
}

/// Numerical knobs shared by the subproblem solvers and the ADMM loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverKnobs {
    pub conic_tolerance: f64,
    /// Residual level at which a solve that stopped early (degenerate
    /// endgame) is still usable.
    pub conic_accept_residual: f64,
    pub conic_max_iters: usize,
    pub ao_max_iters: usize,
    pub ao_rel_tol: f64,
    pub max_admm_iters: usize,
    pub randomization_draws: usize,
    pub rank1_ratio_threshold: f64,
    pub scale_alternation_tol: f64,
    pub scale_alternation_max_rounds: usize,
    pub pg_restarts: usize,
    pub pg_max_iters: usize,
}

impl Default for SolverKnobs {
    fn default() -> Self {
        SolverKnobs {
            conic_tolerance: 1e-8,
            conic_accept_residual: 1e-3,
            conic_max_iters: 200,
            ao_max_iters: 300,
            ao_rel_tol: 1e-6,
            max_admm_iters: 50,
            randomization_draws: 200,
            rank1_ratio_threshold: 1e-6,
            scale_alternation_tol: 1e-8,
            scale_alternation_max_rounds: 6,
            pg_restarts: 4,
            pg_max_iters: 600,
        }
    }
}
