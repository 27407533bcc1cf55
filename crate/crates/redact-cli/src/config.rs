//! Resolved run configuration, embedded verbatim in every report for
//! provenance. Reruns with an identical configuration (seed included)
//! produce identical report and CSV bodies.

use serde::Serialize;

use redact_core::chain::ROW_SUM_TOLERANCE;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub chain: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Master seed; None only for fully deterministic commands.
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_mi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_tv: Option<f64>,
    /// Load-time numeric tolerance on row and weight sums.
    pub tol_numeric: f64,
    pub format: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl RunConfig {
    pub fn new(command: &str, chain: String, format: &str, out: Option<String>) -> Self {
        RunConfig {
            command: command.to_string(),
            chain,
            horizon: None,
            mechanism: None,
            trials: None,
            seed: None,
            prior: None,
            tol_mi: None,
            tol_tv: None,
            tol_numeric: ROW_SUM_TOLERANCE,
            format: format.to_string(),
            out,
        }
    }
}
