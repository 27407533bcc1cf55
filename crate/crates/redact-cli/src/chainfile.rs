//! Chain description files: a JSON document with `states` (array of labels)
//! and `matrix` (array of rows of decimal numerals). Loading enforces full
//! chain validation, naming the offending row on failure.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use redact_core::{ProbabilityVector, StateSpace, TransitionMatrix};

use crate::error::{CliError, from_core};

#[derive(Debug, Deserialize)]
struct ChainFile {
    states: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

pub fn load_chain(path: &Path) -> Result<TransitionMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let parsed: ChainFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let states = StateSpace::new(parsed.states).map_err(from_core)?;
    TransitionMatrix::new(states, parsed.matrix)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Resolve a prior spec: `uniform`, or a path to a JSON array of weights.
pub fn load_prior(spec: &str, n: usize) -> Result<ProbabilityVector, CliError> {
    if spec == "uniform" {
        return Ok(ProbabilityVector::uniform(n));
    }
    let text = fs::read_to_string(spec)
        .map_err(|e| CliError::Input(format!("cannot read prior {spec}: {e}")))?;
    let weights: Vec<f64> =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("prior {spec}: {e}")))?;
    if weights.len() != n {
        return Err(CliError::Input(format!(
            "prior {spec}: {} weights for {n} states",
            weights.len()
        )));
    }
    ProbabilityVector::new(weights).map_err(|e| CliError::Input(format!("prior {spec}: {e}")))
}
