//! Probability vectors on finite state spaces and the total variation metric.
//!
//! Total variation uses the factor-2 convention throughout:
//! `‖μ − ν‖ = Σ_i |μ_i − ν_i| = 2·sup_A |μ(A) − ν(A)| ∈ [0, 2]`. Every bound
//! in [`crate::dynamics`] assumes this scaling.

use crate::{Error, Result};
use rand::Rng;
use serde::Serialize;

/// Weights may drift from exact normalization by at most this much before a
/// distribution is re-normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Drift beyond this signals a kernel bug rather than accumulated rounding;
/// arithmetic constructors refuse to repair it.
pub const NORMALIZATION_HARD_LIMIT: f64 = 1e-6;

/// Default cap on the number of simplex grid points.
pub const DEFAULT_GRID_CAP: u64 = 5_000_000;

/// A finite state space `{1, …, m}` (states are indexed `0..m` internally).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StateSpace(usize);

impl StateSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter(
                "state space must have at least one state".into(),
            ));
        }
        Ok(Self(size))
    }

    pub fn size(&self) -> usize {
        self.0
    }

    /// Iterator over state indices `0..m`.
    pub fn states(&self) -> std::ops::Range<usize> {
        0..self.0
    }
}

/// A probability vector: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Strict constructor for externally supplied weights.
    ///
    /// Rejects negative entries below `-NORMALIZATION_TOL` and sums off one
    /// by more than `NORMALIZATION_TOL`; negatives within tolerance are
    /// clamped to zero.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::build(weights, NORMALIZATION_TOL)
    }

    /// Constructor for weights produced by kernel arithmetic.
    ///
    /// Entries within `-NORMALIZATION_TOL` of zero are clamped; the vector is
    /// re-normalized only when the sum drifts beyond `NORMALIZATION_TOL`, and
    /// drift beyond `NORMALIZATION_HARD_LIMIT` is an error (it signals an
    /// invalid kernel, not rounding).
    pub fn from_arithmetic(weights: Vec<f64>) -> Result<Self> {
        Self::build(weights, NORMALIZATION_HARD_LIMIT)
    }

    fn build(mut weights: Vec<f64>, drift_limit: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "empty weight vector".into(),
            });
        }
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidDistribution {
                    reason: format!("weight {i} is {w}"),
                });
            }
            if *w < -NORMALIZATION_TOL {
                return Err(Error::InvalidDistribution {
                    reason: format!("weight {i} is negative ({w:e})"),
                });
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        let drift = (sum - 1.0).abs();
        if drift > drift_limit {
            return Err(Error::InvalidDistribution {
                reason: format!("weights sum to {sum} (drift {drift:e})"),
            });
        }
        if drift > NORMALIZATION_TOL {
            for w in weights.iter_mut() {
                *w /= sum;
            }
        }
        Ok(Self { weights })
    }

    /// The point mass `δ_state`.
    pub fn vertex(space: StateSpace, state: usize) -> Self {
        assert!(state < space.size(), "state {state} out of range");
        let mut weights = vec![0.0; space.size()];
        weights[state] = 1.0;
        Self { weights }
    }

    pub fn uniform(space: StateSpace) -> Self {
        let m = space.size();
        Self {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, state: usize) -> f64 {
        self.weights[state]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn space(&self) -> StateSpace {
        StateSpace(self.weights.len())
    }
}

fn check_same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Total variation distance `Σ_i |a_i − b_i| ∈ [0, 2]`.
pub fn tv_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    check_same_len(a.weights(), b.weights())?;
    Ok(tv_between(a.weights(), b.weights()))
}

/// TV distance of raw weight slices; callers guarantee equal lengths.
pub(crate) fn tv_between(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// The meet measure `η_i = min(a_i, b_i)`, a sub-probability vector with
/// total mass `1 − ‖a − b‖/2`. It is the overlap used by coupling arguments.
pub fn meet_measure(a: &Distribution, b: &Distribution) -> Result<Vec<f64>> {
    check_same_len(a.weights(), b.weights())?;
    Ok(a.weights()
        .iter()
        .zip(b.weights())
        .map(|(x, y)| x.min(*y))
        .collect())
}

/// Number of grid points with the given denominator: `C(d + m − 1, m − 1)`.
pub fn grid_point_count(space: StateSpace, denominator: u32) -> u128 {
    binomial(denominator as u128 + space.size() as u128 - 1, space.size() as u128 - 1)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All probability vectors whose weights are multiples of `1/denominator`,
/// in lexicographic (first coordinate descending) order. Every vertex `e_k`
/// is included for any `denominator ≥ 1`.
pub fn simplex_grid(space: StateSpace, denominator: u32) -> Result<Vec<Distribution>> {
    simplex_grid_with_cap(space, denominator, DEFAULT_GRID_CAP)
}

/// As [`simplex_grid`], erroring when the point count would exceed `cap`.
pub fn simplex_grid_with_cap(
    space: StateSpace,
    denominator: u32,
    cap: u64,
) -> Result<Vec<Distribution>> {
    if denominator == 0 {
        return Err(Error::InvalidParameter("grid denominator must be ≥ 1".into()));
    }
    let count = grid_point_count(space, denominator);
    if count > cap as u128 {
        return Err(Error::GridCapExceeded { count, cap });
    }
    let m = space.size();
    let d = denominator as f64;
    let mut points = Vec::with_capacity(count as usize);
    let mut counts = vec![0u32; m];
    fill_compositions(&mut counts, 0, denominator, d, &mut points);
    Ok(points)
}

fn fill_compositions(
    counts: &mut [u32],
    pos: usize,
    remaining: u32,
    denom: f64,
    out: &mut Vec<Distribution>,
) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        let weights = counts.iter().map(|&c| c as f64 / denom).collect();
        out.push(Distribution { weights });
        return;
    }
    for c in (0..=remaining).rev() {
        counts[pos] = c;
        fill_compositions(counts, pos + 1, remaining - c, denom, out);
    }
}

/// A uniformly distributed point of the simplex (normalized exponentials).
pub fn random_distribution<R: Rng + ?Sized>(space: StateSpace, rng: &mut R) -> Distribution {
    let mut weights: Vec<f64> = space
        .states()
        .map(|_| {
            let u: f64 = rng.random();
            -(1.0 - u).ln().max(1e-300)
        })
        .collect();
    let sum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= sum;
    }
    Distribution { weights }
}
