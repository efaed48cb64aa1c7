//! Finite-state nonlinear (law-dependent) Markov chains.
//!
//! A nonlinear Markov chain moves by a transition kernel that depends on the
//! current state *and* on the current law of the process: the law evolves as
//! `μ_{n+1} = μ_n P_{μ_n}`. This crate covers the analysis pipeline for the
//! affine-in-law kernel class on finite state spaces:
//!
//! - [`measures`]: probability vectors, total variation distance (factor-2
//!   convention, values in `[0, 2]`), meet measures, and simplex grids.
//! - [`kernels`]: the [`kernels::AffineKernel`] class
//!   `P_μ(x, j) = b[x][j] + Σ_k c[x][j][k]·μ(k)`, validation, evaluation, and
//!   composed multi-step kernels `Q_μ = P_μ · P_{μP_μ} · …`.
//! - [`contraction`]: ergodicity coefficient `α` and law-Lipschitz
//!   coefficient `λ` — exact by vertex enumeration for one step, bracketed by
//!   grid search with local refinement for composed kernels.
//! - [`dynamics`]: law trajectories, invariant-measure solving with
//!   multi-start uniqueness probing, and audits of the convergence-rate
//!   bounds implied by the two-step coefficients.
//! - [`particles`]: seeded mean-field `N`-particle simulation driven by the
//!   empirical law.
//! - [`builtin`]: the two built-in four-state example chains used throughout
//!   the test and acceptance suites.
//!
//! All values are immutable and all operations are pure; everything is safe
//! to share across threads. Grid searches and particle replicas parallelize
//! internally with deterministic reductions, so results do not depend on
//! thread scheduling.

#![forbid(unsafe_code)]

pub mod builtin;
pub mod contraction;
pub mod dynamics;
mod error;
pub mod kernels;
pub mod measures;
pub mod particles;

pub use error::{Error, Result};
pub use kernels::{AffineKernel, CoeffEntry, EvaluatedKernel, ValidationReport};
pub use measures::{Distribution, StateSpace};
