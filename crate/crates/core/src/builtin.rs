//! Built-in four-state example chains, generated from the coupling strength
//! `gamma` rather than stored, so there is no transcription drift.
//!
//! Both chains live on `{1, 2, 3, 4}` and their law dependence sits entirely
//! in the first row. `Example1` mixes from every state pair but couples to
//! the law twice as strongly as its quoted sensitivity; `Example2` has a
//! state pair with disjoint one-step supports (zero one-step ergodicity
//! coefficient) yet contracts over two steps.

use crate::contraction::CoefficientReport;
use crate::kernels::{AffineKernel, CoeffEntry};
use crate::measures::StateSpace;
use crate::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinExample {
    Example1,
    Example2,
}

impl BuiltinExample {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinExample::Example1 => "example1",
            BuiltinExample::Example2 => "example2",
        }
    }

    /// Open admissible interval for `gamma`.
    pub fn gamma_range(&self) -> (f64, f64) {
        match self {
            BuiltinExample::Example1 => (0.0, 0.25),
            BuiltinExample::Example2 => (0.0, 0.5),
        }
    }
}

impl fmt::Display for BuiltinExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinExample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(BuiltinExample::Example1),
            "example2" => Ok(BuiltinExample::Example2),
            other => Err(Error::InvalidParameter(format!(
                "unknown builtin example '{other}' (expected example1 or example2)"
            ))),
        }
    }
}

fn check_gamma(example: BuiltinExample, gamma: f64) -> Result<()> {
    let (low, high) = example.gamma_range();
    if !(gamma > low && gamma < high) {
        return Err(Error::GammaOutOfRange {
            example: example.name(),
            gamma,
            low,
            high,
        });
    }
    Ok(())
}

/// Builds the requested example kernel, rejecting `gamma` outside its open
/// admissible range.
pub fn kernel(example: BuiltinExample, gamma: f64) -> Result<AffineKernel> {
    check_gamma(example, gamma)?;
    let space = StateSpace::new(4).unwrap();
    match example {
        BuiltinExample::Example1 => AffineKernel::new(
            space,
            vec![
                vec![0.001, 0.001, 0.499, 0.499],
                vec![0.499, 0.499, 0.001, 0.001],
                vec![0.499, 0.001, 0.499, 0.001],
                vec![0.001, 0.499, 0.001, 0.499],
            ],
            vec![
                CoeffEntry::new(0, 0, 0, gamma),
                CoeffEntry::new(0, 1, 0, gamma),
                CoeffEntry::new(0, 2, 0, -gamma),
                CoeffEntry::new(0, 3, 0, -gamma),
            ],
        ),
        BuiltinExample::Example2 => AffineKernel::new(
            space,
            vec![
                vec![0.0, 0.0, 0.5, 0.5],
                vec![0.5, 0.5, 0.0, 0.0],
                vec![0.5, 0.0, 0.5, 0.0],
                vec![0.0, 0.5, 0.0, 0.5],
            ],
            vec![
                CoeffEntry::new(0, 1, 0, gamma),
                CoeffEntry::new(0, 2, 0, -gamma),
            ],
        ),
    }
}

/// One-step coefficient values these example families are usually quoted
/// with. [`discrepancy_notes`] compares computed coefficients against them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceCoefficients {
    pub alpha: f64,
    pub lambda: f64,
}

pub fn reference_one_step(example: BuiltinExample, gamma: f64) -> ReferenceCoefficients {
    match example {
        BuiltinExample::Example1 => ReferenceCoefficients { alpha: 0.004, lambda: gamma },
        BuiltinExample::Example2 => ReferenceCoefficients { alpha: 0.0, lambda: gamma },
    }
}

/// Flags computed one-step coefficients that disagree with the quoted
/// reference values for a builtin example. The computed supremum is always
/// the reported number; a note records the mismatch instead of silently
/// adopting either value.
pub fn discrepancy_notes(
    example: BuiltinExample,
    gamma: f64,
    one_step: &CoefficientReport,
) -> Vec<String> {
    let mut notes = Vec::new();
    if one_step.steps != 1 {
        return notes;
    }
    let reference = reference_one_step(example, gamma);
    let tol = 1e-9;
    if (one_step.alpha.value.lower - reference.alpha).abs() > tol {
        notes.push(format!(
            "computed one-step ergodicity coefficient alpha = {} differs from the value {} \
             usually quoted for {}; the computed supremum is reported",
            one_step.alpha.value.lower,
            reference.alpha,
            example.name(),
        ));
    }
    if (one_step.lambda.value.lower - reference.lambda).abs() > tol {
        notes.push(format!(
            "computed one-step law-sensitivity coefficient lambda = {} differs from the value \
             {} usually quoted for {}; the computed supremum is reported",
            one_step.lambda.value.lower,
            reference.lambda,
            example.name(),
        ));
    }
    notes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_range_enforced() {
        assert!(kernel(BuiltinExample::Example1, 0.3).is_err());
        assert!(kernel(BuiltinExample::Example1, 0.0).is_err());
        assert!(kernel(BuiltinExample::Example1, 0.25).is_err());
        assert!(kernel(BuiltinExample::Example1, 0.2).is_ok());
        assert!(kernel(BuiltinExample::Example2, 0.49).is_ok());
        assert!(kernel(BuiltinExample::Example2, 0.5).is_err());
    }

    #[test]
    fn example1_row_one_couples_to_law() {
        let k = kernel(BuiltinExample::Example1, 0.2).unwrap();
        assert_eq!(k.coeff_entries().len(), 4);
        assert!(k.coeff_entries().iter().all(|e| e.x == 0 && e.k == 0));
    }

    #[test]
    fn parse_names() {
        assert_eq!("example1".parse::<BuiltinExample>().unwrap(), BuiltinExample::Example1);
        assert!("example3".parse::<BuiltinExample>().is_err());
    }
}
