//! JSON-lines framing for state dumps: a header line followed by one
//! density matrix per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use nelab_core::ensembles::EnsembleSpec;
use nelab_core::states::DensityMatrix;

use crate::CliError;

/// First line of a dump: `{"header": {...}}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct DumpHeader {
    pub header: HeaderBody,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HeaderBody {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub count: usize,
    pub version: String,
}

impl DumpHeader {
    pub fn states(ensemble: Option<EnsembleSpec>, seed: Option<u64>, count: usize) -> Self {
        DumpHeader {
            header: HeaderBody {
                kind: "states".to_string(),
                ensemble,
                seed,
                count,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }
}

/// Write a dump: header first, then one state per line.
pub fn write_states(
    out: &mut impl Write,
    header: &DumpHeader,
    states: impl Iterator<Item = DensityMatrix>,
) -> Result<(), CliError> {
    let line = serde_json::to_string(header).map_err(CliError::config)?;
    writeln!(out, "{line}").map_err(CliError::io)?;
    for rho in states {
        let line = serde_json::to_string(&rho).map_err(CliError::config)?;
        writeln!(out, "{line}").map_err(CliError::io)?;
    }
    Ok(())
}

/// Read a dump produced by [`write_states`] (or a bare list of states with
/// no header line). Returns states paired with their 1-based line numbers.
pub fn read_states(reader: impl BufRead) -> Result<Vec<(usize, DensityMatrix)>, CliError> {
    let mut states = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(CliError::io)?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        // A header line carries the top-level "header" key.
        if line_no == 1 {
            if let Ok(value) = serde_json::from_str::<serde_json::Value>(&line) {
                if value.get("header").is_some() {
                    continue;
                }
            }
        }
        let rho: DensityMatrix = serde_json::from_str(&line).map_err(|e| {
            CliError::validation(format!("line {line_no}: invalid state: {e}"))
        })?;
        states.push((line_no, rho));
    }
    Ok(states)
}
