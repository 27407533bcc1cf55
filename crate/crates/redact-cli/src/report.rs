//! Report documents (pretty JSON, one per run) and the flat CSV view for
//! sweeps. Serialization is deterministic: identical configurations yield
//! byte-identical bodies.

use std::fs;
use std::path::PathBuf;

use redact_core::{DistortionReport, OutputSymbol, TransitionMatrix};
use serde_json::Value;

use crate::error::CliError;

pub fn emit_json(doc: &Value, out: &Option<PathBuf>) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    body.push('\n');
    emit_text(&body, out)
}

pub fn emit_text(body: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, body)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Render a released symbol with the chain's state labels.
pub fn symbol_label(chain: &TransitionMatrix, symbol: OutputSymbol) -> String {
    match symbol {
        OutputSymbol::Erased => "*".to_string(),
        OutputSymbol::State(s) => chain.states().label(s).to_string(),
    }
}

/// Flat sweep view: one row per horizon with empty cells where a column
/// does not apply.
pub fn sweep_csv(report: &DistortionReport) -> String {
    let mut body =
        String::from("N,exact_smr,exact_sst,empirical_mean,ci_halfwidth,spectral_bound\n");
    for (i, n) in report.grid.iter().enumerate() {
        let sst = report
            .exact_sst
            .as_ref()
            .map(|v| v[i].to_string())
            .unwrap_or_default();
        let (emp, hw) = report
            .empirical
            .as_ref()
            .map(|v| (v[i].mean.to_string(), v[i].half_width.to_string()))
            .unwrap_or_default();
        let bound = report
            .spectral
            .map(|sb| sb.bound.to_string())
            .unwrap_or_default();
        body.push_str(&format!(
            "{n},{},{sst},{emp},{hw},{bound}\n",
            report.exact_smr[i]
        ));
    }
    body
}
