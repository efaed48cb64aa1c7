//! Law trajectories, invariant measures, and convergence-rate audits.
//!
//! The invariant measure is found by fixed-point iteration of
//! `μ ↦ μ P_μ` — under the two-step contraction hypotheses the law sequence
//! is Cauchy, so iteration is guaranteed to terminate; closed forms are used
//! only as test oracles. Uniqueness is probed empirically by running several
//! starts and measuring their pairwise TV gaps.

use crate::contraction::CoefficientReport;
use crate::kernels::{step, AffineKernel};
use crate::measures::{tv_distance, Distribution, StateSpace};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Treat `λ₂` and `α₂` as equal below this gap when selecting the bound
/// branch.
pub const BRANCH_EQ_TOL: f64 = 1e-12;

/// Audit rows are satisfied down to this slack.
pub const AUDIT_SLACK_TOL: f64 = 1e-9;

/// A law sequence `μ₀, …, μ_N` with per-step TV distances
/// (`tv_deltas[n] = ‖μ_n − μ_{n+1}‖`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub laws: Vec<Distribution>,
    pub tv_deltas: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    pub fn last(&self) -> &Distribution {
        self.laws.last().expect("trajectories hold at least the initial law")
    }
}

/// Iterates `μ_{n+1} = μ_n P_{μ_n}` for `n` steps (trajectory length `n+1`).
pub fn iterate(kernel: &AffineKernel, mu0: &Distribution, n: usize) -> Result<Trajectory> {
    let mut laws = Vec::with_capacity(n + 1);
    let mut tv_deltas = Vec::with_capacity(n);
    laws.push(mu0.clone());
    for _ in 0..n {
        let next = step(kernel, laws.last().unwrap())?;
        tv_deltas.push(tv_distance(laws.last().unwrap(), &next)?);
        laws.push(next);
    }
    Ok(Trajectory { laws, tv_deltas })
}

/// Result of the multi-start invariant-measure probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantResult {
    /// Converged law from the first start.
    pub pi: Distribution,
    /// Self-consistency residual `‖πP_π − π‖`.
    pub residual: f64,
    /// Iterations used by the first start.
    pub iterations: usize,
    /// Initial laws probed.
    pub starts: Vec<Distribution>,
    /// Maximal pairwise TV gap among the converged laws (uniqueness probe).
    pub max_pairwise_gap: f64,
}

/// The default start set: every vertex plus the uniform law.
pub fn vertex_and_uniform_starts(space: StateSpace) -> Vec<Distribution> {
    let mut starts: Vec<Distribution> = space
        .states()
        .map(|x| Distribution::vertex(space, x))
        .collect();
    starts.push(Distribution::uniform(space));
    starts
}

/// Fixed-point iteration from every start until the per-step TV delta drops
/// to `tol`. Non-convergence within `max_iters` is an error carrying the
/// last iterate and delta — in the uncovered regime there may be no
/// invariant measure, or infinitely many.
pub fn invariant(
    kernel: &AffineKernel,
    starts: &[Distribution],
    tol: f64,
    max_iters: usize,
) -> Result<InvariantResult> {
    if starts.is_empty() {
        return Err(Error::InvalidParameter("at least one start is required".into()));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let runs: Vec<(Distribution, usize)> = starts
        .par_iter()
        .map(|start| {
            let mut current = start.clone();
            for iteration in 1..=max_iters {
                let next = step(kernel, &current)?;
                let delta = tv_distance(&current, &next)?;
                if delta <= tol {
                    return Ok((next, iteration));
                }
                current = next;
            }
            let last = step(kernel, &current)?;
            let delta = tv_distance(&current, &last)?;
            Err(Error::NonConvergence {
                iterations: max_iters,
                last_delta: delta,
                last_iterate: last,
            })
        })
        .collect::<Result<_>>()?;

    let (pi, iterations) = runs[0].clone();
    let mut max_pairwise_gap = 0.0_f64;
    for (i, (a, _)) in runs.iter().enumerate() {
        for (b, _) in runs.iter().skip(i + 1) {
            max_pairwise_gap = max_pairwise_gap.max(tv_distance(a, b)?);
        }
    }
    let residual = tv_distance(&step(kernel, &pi)?, &pi)?;
    Ok(InvariantResult {
        pi,
        residual,
        iterations,
        starts: starts.to_vec(),
        max_pairwise_gap,
    })
}

/// Evaluates the two-step convergence bound at step `n`.
///
/// With `λ₂ < α₂` the decay is geometric:
/// `d₀·(1 − α₂ + λ₂)^⌊n/2⌋`, inflated by `(1 + λ₁)` on odd `n`.
/// With `λ₂ = α₂` (within `1e-12`) the decay is linear-rate:
/// `d₀ / (1 + (λ₂n/2)·d₀)`, with the same odd-step inflation.
pub fn bound_value(alpha2: f64, lambda2: f64, lambda1: f64, d0: f64, n: usize) -> Result<f64> {
    if lambda2 > alpha2 {
        return Err(Error::HypothesisFailure { lambda2, alpha2, certified: true });
    }
    if !(0.0..=1.0).contains(&alpha2) || lambda2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "coefficients out of range: alpha2 = {alpha2}, lambda2 = {lambda2}"
        )));
    }
    if lambda1 < 0.0 {
        return Err(Error::InvalidParameter(format!("lambda1 = {lambda1} must be ≥ 0")));
    }
    if !(0.0..=2.0).contains(&d0) {
        return Err(Error::InvalidParameter(format!("d0 = {d0} outside [0, 2]")));
    }
    let odd = if n % 2 == 1 { 1.0 + lambda1 } else { 1.0 };
    let value = if (alpha2 - lambda2).abs() <= BRANCH_EQ_TOL {
        d0 / (1.0 + (lambda2 * n as f64 / 2.0) * d0)
    } else {
        d0 * (1.0 - alpha2 + lambda2).powi((n / 2) as i32)
    };
    Ok(value * odd)
}

/// Which bound branch an audit used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundBranch {
    /// `λ₂ < α₂` certified: geometric branch only.
    Geometric,
    /// The brackets straddle `λ₂ = α₂`; both branches are evaluated and the
    /// weaker (larger) bound is binding.
    BothBranches,
}

/// One audited step: the observed TV distance against the theorem bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundAudit {
    pub n: usize,
    pub observed: f64,
    pub bound: f64,
    /// `bound − observed`; satisfied iff ≥ −1e-9.
    pub slack: f64,
    pub satisfied: bool,
}

/// An audited trajectory with the context needed to reproduce the bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub rows: Vec<BoundAudit>,
    pub branch: BoundBranch,
    /// Initial distance `d₀` the bounds start from.
    pub d0: f64,
    /// The invariant measure (self-convergence mode) when one was solved.
    pub pi: Option<Distribution>,
}

impl AuditReport {
    pub fn all_satisfied(&self) -> bool {
        self.rows.iter().all(|row| row.satisfied)
    }
}

struct CertifiedEnds {
    alpha2: f64,
    lambda2_upper: f64,
    lambda2_lower: f64,
    lambda1: f64,
    branch: BoundBranch,
}

/// Pessimistic coefficient ends and branch selection; errors when the
/// hypotheses fail. `certified: true` means even the optimistic ends
/// violate `λ₂ ≤ α₂`; otherwise the brackets are merely too wide to certify
/// coverage.
fn certified_ends(
    kernel: &AffineKernel,
    two: &CoefficientReport,
    one: &CoefficientReport,
) -> Result<CertifiedEnds> {
    if one.steps != 1 || two.steps != 2 {
        return Err(Error::InvalidParameter(format!(
            "audit needs a one-step and a two-step report, got {} and {}",
            one.steps, two.steps
        )));
    }
    if one.kernel_fingerprint != kernel.fingerprint()
        || two.kernel_fingerprint != kernel.fingerprint()
    {
        return Err(Error::ReportMismatch);
    }
    let alpha2 = two.alpha.value.lower;
    let lambda2_upper = two.lambda.value.upper;
    if lambda2_upper > alpha2 + BRANCH_EQ_TOL {
        let certainly = two.lambda.value.lower > two.alpha.value.upper + BRANCH_EQ_TOL;
        return Err(Error::HypothesisFailure {
            lambda2: lambda2_upper,
            alpha2,
            certified: certainly,
        });
    }
    let branch = if lambda2_upper < alpha2 - BRANCH_EQ_TOL {
        BoundBranch::Geometric
    } else {
        BoundBranch::BothBranches
    };
    Ok(CertifiedEnds {
        alpha2,
        lambda2_upper,
        lambda2_lower: two.lambda.value.lower,
        lambda1: one.lambda.value.upper,
        branch,
    })
}

fn branch_bound(ends: &CertifiedEnds, d0: f64, n: usize) -> Result<f64> {
    match ends.branch {
        BoundBranch::Geometric => {
            bound_value(ends.alpha2, ends.lambda2_upper, ends.lambda1, d0, n)
        }
        BoundBranch::BothBranches => {
            // Geometric branch with λ₂ capped at α₂ (rate 1 in the worst
            // case) and the linear-rate branch with the pessimistic lower
            // λ₂; the weaker bound is binding.
            let geometric = bound_value(
                ends.alpha2,
                ends.lambda2_upper.min(ends.alpha2),
                ends.lambda1,
                d0,
                n,
            )?;
            let linear = bound_value(
                ends.lambda2_lower.min(ends.alpha2),
                ends.lambda2_lower.min(ends.alpha2),
                ends.lambda1,
                d0,
                n,
            )?;
            Ok(geometric.max(linear))
        }
    }
}

fn audit_rows(observed: &[f64], ends: &CertifiedEnds, d0: f64) -> Result<Vec<BoundAudit>> {
    observed
        .iter()
        .enumerate()
        .map(|(n, &obs)| {
            let bound = branch_bound(ends, d0, n)?;
            let slack = bound - obs;
            Ok(BoundAudit { n, observed: obs, bound, slack, satisfied: slack >= -AUDIT_SLACK_TOL })
        })
        .collect()
}

/// Audits `‖μ_n − π‖` against the certified two-step bound for
/// `n = 0…n_max`. The invariant measure is solved internally from the
/// vertex-plus-uniform starts; hypothesis failures error before any
/// iteration.
pub fn audit_convergence(
    kernel: &AffineKernel,
    mu0: &Distribution,
    two: &CoefficientReport,
    one: &CoefficientReport,
    n_max: usize,
) -> Result<AuditReport> {
    let ends = certified_ends(kernel, two, one)?;
    let solved = invariant(
        kernel,
        &vertex_and_uniform_starts(kernel.space()),
        1e-13,
        200_000,
    )?;
    let traj = iterate(kernel, mu0, n_max)?;
    let observed: Vec<f64> = traj
        .laws
        .iter()
        .map(|law| tv_distance(law, &solved.pi))
        .collect::<Result<_>>()?;
    let d0 = observed[0];
    Ok(AuditReport {
        rows: audit_rows(&observed, &ends, d0)?,
        branch: ends.branch,
        d0,
        pi: Some(solved.pi),
    })
}

/// Two-trajectory audit: `‖μ_n − ν_n‖` against the same bounds with
/// `d₀ = ‖μ₀ − ν₀‖`.
pub fn audit_pair(
    kernel: &AffineKernel,
    mu0: &Distribution,
    nu0: &Distribution,
    two: &CoefficientReport,
    one: &CoefficientReport,
    n_max: usize,
) -> Result<AuditReport> {
    let ends = certified_ends(kernel, two, one)?;
    let a = iterate(kernel, mu0, n_max)?;
    let b = iterate(kernel, nu0, n_max)?;
    let observed: Vec<f64> = a
        .laws
        .iter()
        .zip(&b.laws)
        .map(|(x, y)| tv_distance(x, y))
        .collect::<Result<_>>()?;
    let d0 = observed[0];
    Ok(AuditReport {
        rows: audit_rows(&observed, &ends, d0)?,
        branch: ends.branch,
        d0,
        pi: None,
    })
}

/// Closed form of the recursion cap for `a_{n+1} ≤ a_n(1 − λa_n)`:
/// any such sequence stays below `a₀ / (1 + a₀λn)`.
pub fn lemma_bound_sequence(a0: f64, lambda: f64, n: usize) -> Result<f64> {
    if !(a0 > 0.0 && a0 <= 1.0) {
        return Err(Error::InvalidParameter(format!("a0 = {a0} outside (0, 1]")));
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    Ok(a0 / (1.0 + a0 * lambda * n as f64))
}
