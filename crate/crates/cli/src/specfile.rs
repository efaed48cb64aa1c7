//! The kernel spec file format: strict JSON with 1-based state indices
//! (matching the usual state labels 1..m); indices are 0-based internally.

use crate::error::{CliError, CliResult};
use nlmc::{AffineKernel, CoeffEntry, StateSpace};
use serde::{Deserialize, Serialize};

/// One coefficient entry as stored on disk (1-based indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecCoeff {
    pub x: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

/// On-disk kernel description. Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpecFile {
    pub name: String,
    pub states: usize,
    pub base: Vec<Vec<f64>>,
    pub coeff: Vec<SpecCoeff>,
}

impl KernelSpecFile {
    /// Strict parse followed by kernel validation; syntax errors carry
    /// line/column, validation failures carry the violation list.
    pub fn parse(text: &str) -> CliResult<Self> {
        let spec: KernelSpecFile =
            serde_json::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        for (i, entry) in spec.coeff.iter().enumerate() {
            for (label, idx) in [("x", entry.x), ("j", entry.j), ("k", entry.k)] {
                if idx == 0 || idx > spec.states {
                    return Err(CliError::Validation(format!(
                        "coeff[{i}].{label} = {idx} outside [1, {}]",
                        spec.states
                    )));
                }
            }
        }
        Ok(spec)
    }

    /// Builds the kernel, rejecting invariant violations with the report.
    pub fn to_kernel(&self) -> CliResult<AffineKernel> {
        let space = StateSpace::new(self.states).map_err(|e| CliError::Validation(e.to_string()))?;
        let coeff = self
            .coeff
            .iter()
            .map(|c| CoeffEntry::new(c.x - 1, c.j - 1, c.k - 1, c.value))
            .collect();
        AffineKernel::new(space, self.base.clone(), coeff).map_err(CliError::from)
    }

    /// Builds the kernel checking only shapes, so that `validate` can
    /// report invariant violations instead of refusing the input.
    pub fn to_kernel_unchecked(&self) -> CliResult<AffineKernel> {
        let space = StateSpace::new(self.states).map_err(|e| CliError::Validation(e.to_string()))?;
        let coeff = self
            .coeff
            .iter()
            .map(|c| CoeffEntry::new(c.x - 1, c.j - 1, c.k - 1, c.value))
            .collect();
        AffineKernel::from_parts_unchecked(space, self.base.clone(), coeff)
            .map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn from_kernel(kernel: &AffineKernel, name: &str) -> Self {
        Self {
            name: name.to_string(),
            states: kernel.size(),
            base: kernel.base_rows(),
            coeff: kernel
                .coeff_entries()
                .iter()
                .map(|e| SpecCoeff { x: e.x + 1, j: e.j + 1, k: e.k + 1, value: e.value })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec files serialize")
    }
}
