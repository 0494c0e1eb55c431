//! Default tolerances and limits, gathered in one place so the CLI can print
//! and override them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Config {
    /// Negative entries at or above this value are clamped to zero on load.
    pub clamp_floor: f64,
    /// Row and column sum tolerance for the doubly stochastic tag.
    pub stochastic_tol: f64,
    /// Target relative residual for the Perron eigenpair.
    pub pf_tol: f64,
    /// Residual above which a Perron eigenpair is rejected.
    pub pf_accept: f64,
    pub pf_max_iter: usize,
    /// Relative tolerance when comparing per-component Perron values.
    pub pf_block_rel_tol: f64,
    /// Largest n for the dense eigensolver cross-check of the Perron root.
    pub pf_crosscheck_n: usize,
    pub phi_n_limit: usize,
    /// Slack on the cut weight constraint w(S) <= 1/2.
    pub weight_slack: f64,
    /// Relative slack used for every inequality check.
    pub bound_slack: f64,
    pub detailed_balance_tol: f64,
    pub sinkhorn_tol: f64,
    pub sinkhorn_max_sweeps: usize,
    pub eps: f64,
    pub tau_max: u64,
    pub t_max: f64,
    pub t_rel_resolution: f64,
    pub expm_tol: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            clamp_floor: -1e-15,
            stochastic_tol: 1e-12,
            pf_tol: 1e-12,
            pf_accept: 1e-10,
            pf_max_iter: 100_000,
            pf_block_rel_tol: 1e-9,
            pf_crosscheck_n: 64,
            phi_n_limit: 24,
            weight_slack: 1e-12,
            bound_slack: 1e-9,
            detailed_balance_tol: 1e-10,
            sinkhorn_tol: 1e-12,
            sinkhorn_max_sweeps: 100_000,
            eps: 0.25,
            tau_max: 1_000_000,
            t_max: 1e4,
            t_rel_resolution: 1e-3,
            expm_tol: 1e-15,
            seed: 1729,
        }
    }
}
