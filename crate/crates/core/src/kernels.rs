//! Law-dependent transition kernels with affine dependence on the law.
//!
//! An [`AffineKernel`] encodes `P_μ(x, j) = b[x][j] + Σ_k c[x][j][k]·μ(k)`.
//! Affinity makes one-step contraction coefficients exactly computable by
//! vertex enumeration, while composed kernels become polynomial in the law
//! (the second factor of `Q_μ` is evaluated at the evolved law `μP_μ`).

use crate::measures::{Distribution, StateSpace, NORMALIZATION_TOL};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

/// Coefficient entries smaller than this are dropped on ingest.
pub const COEFF_EPSILON: f64 = 1e-15;

/// One sparse coefficient `c[x][j][k]`: the sensitivity of the transition
/// probability from state `x` to state `j` to the law's mass at state `k`.
/// Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffEntry {
    pub x: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

impl CoeffEntry {
    pub fn new(x: usize, j: usize, k: usize, value: f64) -> Self {
        Self { x, j, k, value }
    }
}

/// A violated kernel invariant, with indices and magnitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    /// `Σ_j b[x][j]` differs from 1 beyond tolerance.
    BaseRowSum { x: usize, sum: f64 },
    /// `Σ_j c[x][j][k] ≠ 0`: the row sum would depend on `μ(k)`.
    CoeffRowSum { x: usize, k: usize, sum: f64 },
    /// `b[x][j] + c[x][j][k] < 0` at the simplex vertex `e_k`; by affinity
    /// the entry is then negative somewhere on the simplex.
    VertexNegative { x: usize, j: usize, k: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BaseRowSum { x, sum } => {
                write!(f, "base row {x} sums to {sum} instead of 1")
            }
            Violation::CoeffRowSum { x, k, sum } => write!(
                f,
                "row-sum dependence: coefficients of row {x} for law component {k} sum to {sum}"
            ),
            Violation::VertexNegative { x, j, k, value } => write!(
                f,
                "entry ({x}, {j}) becomes negative ({value}) at the vertex law e_{k}"
            ),
        }
    }
}

/// Outcome of checking the three [`AffineKernel`] invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "- {v}")?;
        }
        Ok(())
    }
}

/// A law-dependent stochastic matrix `P_μ(x, j) = b[x][j] + Σ_k c[x][j][k]·μ(k)`.
///
/// Coefficients are stored sparse with dense semantics. The invariants —
/// base rows summing to one, coefficient row sums vanishing per law
/// component, and nonnegativity at every simplex vertex — together make
/// `P_μ` a transition kernel for every law `μ` on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineKernel {
    space: StateSpace,
    /// Row-major `m×m` base matrix.
    base: Vec<f64>,
    /// Sorted by `(x, j, k)`, duplicates merged, near-zero entries dropped.
    coeff: Vec<CoeffEntry>,
}

impl AffineKernel {
    /// Builds a kernel and rejects it if any invariant is violated.
    pub fn new(space: StateSpace, base: Vec<Vec<f64>>, coeff: Vec<CoeffEntry>) -> Result<Self> {
        let kernel = Self::from_parts_unchecked(space, base, coeff)?;
        let report = kernel.validate();
        if report.is_ok() {
            Ok(kernel)
        } else {
            Err(Error::InvalidKernel { report })
        }
    }

    /// Builds a kernel checking only shapes and index ranges, so that
    /// [`AffineKernel::validate`] can report invariant violations as data.
    pub fn from_parts_unchecked(
        space: StateSpace,
        base: Vec<Vec<f64>>,
        coeff: Vec<CoeffEntry>,
    ) -> Result<Self> {
        let m = space.size();
        if base.len() != m {
            return Err(Error::DimensionMismatch { left: base.len(), right: m });
        }
        let mut flat = Vec::with_capacity(m * m);
        for row in &base {
            if row.len() != m {
                return Err(Error::DimensionMismatch { left: row.len(), right: m });
            }
            flat.extend_from_slice(row);
        }
        let mut merged: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for e in coeff {
            if e.x >= m || e.j >= m || e.k >= m {
                return Err(Error::InvalidParameter(format!(
                    "coefficient index ({}, {}, {}) out of range for {m} states",
                    e.x, e.j, e.k
                )));
            }
            *merged.entry((e.x, e.j, e.k)).or_insert(0.0) += e.value;
        }
        let coeff = merged
            .into_iter()
            .filter(|(_, v)| v.abs() >= COEFF_EPSILON)
            .map(|((x, j, k), value)| CoeffEntry { x, j, k, value })
            .collect();
        Ok(Self { space, base: flat, coeff })
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    pub fn base_entry(&self, x: usize, j: usize) -> f64 {
        self.base[x * self.size() + j]
    }

    pub fn base_rows(&self) -> Vec<Vec<f64>> {
        self.base.chunks(self.size()).map(|r| r.to_vec()).collect()
    }

    pub fn coeff_entries(&self) -> &[CoeffEntry] {
        &self.coeff
    }

    /// Dense `m×m×m` coefficient tensor, indexed `[x][j][k]` flattened.
    pub fn coeff_dense(&self) -> Vec<f64> {
        let m = self.size();
        let mut dense = vec![0.0; m * m * m];
        for e in &self.coeff {
            dense[(e.x * m + e.j) * m + e.k] = e.value;
        }
        dense
    }

    /// True when the kernel does not depend on the law at all.
    pub fn is_law_independent(&self) -> bool {
        self.coeff.is_empty()
    }

    /// Checks the three kernel invariants and reports every violation.
    /// Violations are data, not errors.
    pub fn validate(&self) -> ValidationReport {
        let m = self.size();
        let mut violations = Vec::new();
        for x in 0..m {
            let sum: f64 = (0..m).map(|j| self.base_entry(x, j)).sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                violations.push(Violation::BaseRowSum { x, sum });
            }
        }
        let dense = self.coeff_dense();
        for x in 0..m {
            for k in 0..m {
                let sum: f64 = (0..m).map(|j| dense[(x * m + j) * m + k]).sum();
                if sum.abs() > NORMALIZATION_TOL {
                    violations.push(Violation::CoeffRowSum { x, k, sum });
                }
            }
        }
        // One violation per entry (x, j), at the worst vertex.
        for x in 0..m {
            for j in 0..m {
                let mut worst: Option<(usize, f64)> = None;
                for k in 0..m {
                    let value = self.base_entry(x, j) + dense[(x * m + j) * m + k];
                    if value < -NORMALIZATION_TOL
                        && worst.is_none_or(|(_, w)| value < w)
                    {
                        worst = Some((k, value));
                    }
                }
                if let Some((k, value)) = worst {
                    violations.push(Violation::VertexNegative { x, j, k, value });
                }
            }
        }
        ValidationReport { violations }
    }

    /// A deterministic identity for "same kernel" checks across reports.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        self.size().hash(&mut hasher);
        for b in &self.base {
            b.to_bits().hash(&mut hasher);
        }
        for e in &self.coeff {
            (e.x, e.j, e.k, e.value.to_bits()).hash(&mut hasher);
        }
        hasher.finish()
    }
}

/// The stochastic matrix `P_μ` for one fixed law `μ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluatedKernel {
    space: StateSpace,
    /// Row-major `m×m`, each row a probability vector.
    rows: Vec<f64>,
}

impl EvaluatedKernel {
    fn from_rows(space: StateSpace, mut rows: Vec<f64>) -> Result<Self> {
        let m = space.size();
        for x in 0..m {
            normalize_row(&mut rows[x * m..(x + 1) * m], x)?;
        }
        Ok(Self { space, rows })
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let m = self.size();
        &self.rows[x * m..(x + 1) * m]
    }

    pub fn row_distribution(&self, x: usize) -> Distribution {
        Distribution::from_arithmetic(self.row(x).to_vec())
            .expect("evaluated rows are normalized on construction")
    }

    pub fn entry(&self, x: usize, j: usize) -> f64 {
        self.rows[x * self.size() + j]
    }

    /// `μ · P`: pushes a law through this matrix.
    pub fn propagate(&self, mu: &Distribution) -> Result<Distribution> {
        let m = self.size();
        if mu.len() != m {
            return Err(Error::DimensionMismatch { left: mu.len(), right: m });
        }
        let mut out = vec![0.0; m];
        for (x, w) in mu.weights().iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for (j, p) in self.row(x).iter().enumerate() {
                out[j] += w * p;
            }
        }
        Distribution::from_arithmetic(out)
    }
}

/// Applies the arithmetic tolerance policy to one matrix row in place.
fn normalize_row(row: &mut [f64], x: usize) -> Result<()> {
    for (j, v) in row.iter_mut().enumerate() {
        if *v < -NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution {
                reason: format!("kernel row {x} entry {j} is negative ({v:e})"),
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = row.iter().sum();
    let drift = (sum - 1.0).abs();
    if drift > crate::measures::NORMALIZATION_HARD_LIMIT {
        return Err(Error::InvalidDistribution {
            reason: format!("kernel row {x} sums to {sum}"),
        });
    }
    if drift > NORMALIZATION_TOL {
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

fn check_law(kernel: &AffineKernel, mu: &Distribution) -> Result<()> {
    if mu.len() != kernel.size() {
        return Err(Error::DimensionMismatch {
            left: mu.len(),
            right: kernel.size(),
        });
    }
    Ok(())
}

/// Evaluates the kernel at a fixed law: `rows[x][j] = b[x][j] + Σ_k c[x][j][k]·μ(k)`.
pub fn evaluate(kernel: &AffineKernel, mu: &Distribution) -> Result<EvaluatedKernel> {
    check_law(kernel, mu)?;
    let m = kernel.size();
    let mut rows = kernel.base.clone();
    for e in &kernel.coeff {
        rows[e.x * m + e.j] += e.value * mu.weight(e.k);
    }
    EvaluatedKernel::from_rows(kernel.space, rows)
}

/// One law update `μ ↦ μ P_μ`.
pub fn step(kernel: &AffineKernel, mu: &Distribution) -> Result<Distribution> {
    evaluate(kernel, mu)?.propagate(mu)
}

/// The two-step kernel `Q_μ = P_μ · P_{μ₁(μ)}` where `μ₁(μ) = μ P_μ`:
/// the second factor uses the evolved law, not `μ`.
pub fn two_step(kernel: &AffineKernel, mu: &Distribution) -> Result<EvaluatedKernel> {
    k_step(kernel, mu, 2)
}

/// The `steps`-step kernel `Q⁽ˢ⁾_μ = P_μ · P_{μ₁} ⋯ P_{μ_{s−1}}`, each factor
/// evaluated at the law reached so far. `steps = 1` is [`evaluate`].
pub fn k_step(kernel: &AffineKernel, mu: &Distribution, steps: u32) -> Result<EvaluatedKernel> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be ≥ 1".into()));
    }
    check_law(kernel, mu)?;
    let m = kernel.size();
    let mut composed = evaluate(kernel, mu)?;
    let mut law = composed.propagate(mu)?;
    for _ in 1..steps {
        let factor = evaluate(kernel, &law)?;
        let mut rows = vec![0.0; m * m];
        for x in 0..m {
            let left = composed.row(x);
            for (x1, w) in left.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let right = factor.row(x1);
                for j in 0..m {
                    rows[x * m + j] += w * right[j];
                }
            }
        }
        composed = EvaluatedKernel::from_rows(kernel.space, rows)?;
        law = factor.propagate(&law)?;
    }
    Ok(composed)
}
