//! Ergodicity and law-Lipschitz coefficients for one-step and composed
//! kernels.
//!
//! For one step both coefficients are exact: the objectives are convex in
//! the pair of driving laws (affine kernel entries under absolute values),
//! so their suprema over the product of simplices sit at vertex pairs, and
//! the law-sensitivity objective is maximized over difference directions
//! whose extreme points are `(e_a − e_b)/2`.
//!
//! Composed kernels depend on the law through every factor, making the
//! objectives polynomial; vertex enumeration is no longer sound. Those
//! coefficients are bracketed instead: a simplex-grid search with local
//! coordinate-wise refinement produces the lower end, and the upper end
//! adds a mesh error scaled by a global law-sensitivity bound composed from
//! the exact one-step coefficients. The bound is re-validated on random
//! pairs on every search.

use crate::kernels::{evaluate, k_step, AffineKernel, EvaluatedKernel};
use crate::measures::{
    grid_point_count, random_distribution, simplex_grid_with_cap, tv_between, Distribution,
};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

/// Tolerance for deciding `λ = α` when deriving a regime.
pub const REGIME_EQ_TOL: f64 = 1e-9;

/// Parameters of the bracketing search for composed-kernel coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Simplex grid denominator for both laws.
    pub denominator: u32,
    /// Refinement terminates once the move size drops below this.
    pub min_step: f64,
    /// Law pairs closer than this in TV are excluded from the ratio search;
    /// diagonal limits are probed along vertex-difference directions instead.
    pub pair_floor: f64,
    /// Cap on the number of grid pair evaluations.
    pub eval_cap: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            denominator: 20,
            min_step: 1e-6,
            pair_floor: 1e-9,
            eval_cap: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Certification {
    /// The value is the supremum itself (up to floating-point rounding).
    Exact,
    /// `lower` was attained by search; `upper` adds the mesh error.
    Bracketed,
}

impl fmt::Display for Certification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Certification::Exact => "exact",
            Certification::Bracketed => "bracketed",
        })
    }
}

/// An enclosure of a coefficient; `lower == upper` when exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientValue {
    pub lower: f64,
    pub upper: f64,
    pub certification: Certification,
}

impl CoefficientValue {
    fn exact(value: f64) -> Self {
        Self { lower: value, upper: value, certification: Certification::Exact }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Argmax of the ergodicity objective `‖K_μ(x,·) − K_ν(y,·)‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaWitness {
    pub mu: Distribution,
    pub nu: Distribution,
    pub x: usize,
    pub y: usize,
}

/// Argmax of the law-sensitivity ratio `‖K_μ(x,·) − K_ν(x,·)‖ / ‖μ − ν‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaWitness {
    pub mu: Distribution,
    pub nu: Distribution,
    pub x: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub value: CoefficientValue,
    pub witness: AlphaWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub value: CoefficientValue,
    pub witness: LambdaWitness,
}

/// Which convergence guarantee the pair `(α, λ)` supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `λ < α`: geometric contraction.
    Exponential,
    /// `λ = α` within tolerance: linear-rate contraction.
    Linear,
    /// `λ > α`: no guarantee from these coefficients.
    Uncovered,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Exponential => "exponential",
            Regime::Linear => "linear",
            Regime::Uncovered => "uncovered",
        })
    }
}

/// Coefficients of the `steps`-step kernel, with certification and argmax
/// witnesses. The regime is derived from the pessimistic bracket ends
/// (upper `λ`, lower `α`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub steps: u32,
    pub alpha: AlphaEstimate,
    pub lambda: LambdaEstimate,
    pub regime: Regime,
    pub kernel_fingerprint: u64,
}

fn derive_regime(alpha: &CoefficientValue, lambda: &CoefficientValue) -> Regime {
    let a = alpha.lower;
    let l = lambda.upper;
    if l < a - REGIME_EQ_TOL {
        Regime::Exponential
    } else if l <= a + REGIME_EQ_TOL {
        Regime::Linear
    } else {
        Regime::Uncovered
    }
}

fn ensure_valid(kernel: &AffineKernel) -> Result<()> {
    let report = kernel.validate();
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidKernel { report })
    }
}

/// Exact one-step ergodicity coefficient
/// `α = 1 − ½·sup ‖P_μ(x,·) − P_ν(y,·)‖` by vertex enumeration: the
/// objective is convex in `(μ, ν)`, so the supremum over the product of
/// simplices is attained at a vertex pair. Ties break lexicographically on
/// `(x, y, a, b)`.
pub fn alpha_one_step(kernel: &AffineKernel) -> Result<AlphaEstimate> {
    ensure_valid(kernel)?;
    let m = kernel.size();
    let space = kernel.space();
    let at_vertex: Vec<EvaluatedKernel> = (0..m)
        .map(|a| evaluate(kernel, &Distribution::vertex(space, a)))
        .collect::<Result<_>>()?;
    let mut sup = f64::NEG_INFINITY;
    let mut arg = (0, 0, 0, 0);
    for x in 0..m {
        for y in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let v = tv_between(at_vertex[a].row(x), at_vertex[b].row(y));
                    if v > sup {
                        sup = v;
                        arg = (x, y, a, b);
                    }
                }
            }
        }
    }
    let (x, y, a, b) = arg;
    Ok(AlphaEstimate {
        value: CoefficientValue::exact(1.0 - sup / 2.0),
        witness: AlphaWitness {
            mu: Distribution::vertex(space, a),
            nu: Distribution::vertex(space, b),
            x,
            y,
        },
    })
}

/// Exact one-step law-sensitivity coefficient: the smallest `λ` with
/// `‖P_μ(x,·) − P_ν(x,·)‖ ≤ λ‖μ − ν‖`. The difference is linear in
/// `d = μ − ν`, and the feasible directions `{Σ|d_i| ≤ 1, Σ d_i = 0}` have
/// extreme points `(e_a − e_b)/2`, so
/// `λ = max_x max_{a≠b} ½·Σ_j |c[x][j][a] − c[x][j][b]|` exactly.
pub fn lambda_one_step(kernel: &AffineKernel) -> Result<LambdaEstimate> {
    ensure_valid(kernel)?;
    let m = kernel.size();
    let space = kernel.space();
    let dense = kernel.coeff_dense();
    let mut sup = 0.0_f64;
    let mut arg = (0, 0, 0);
    for x in 0..m {
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                let v: f64 = (0..m)
                    .map(|j| (dense[(x * m + j) * m + a] - dense[(x * m + j) * m + b]).abs())
                    .sum::<f64>()
                    / 2.0;
                if v > sup {
                    sup = v;
                    arg = (x, a, b);
                }
            }
        }
    }
    let (x, a, b) = arg;
    let (mu, nu) = if m > 1 && sup > 0.0 {
        (Distribution::vertex(space, a), Distribution::vertex(space, b))
    } else {
        (Distribution::vertex(space, 0), Distribution::vertex(space, 0))
    };
    Ok(LambdaEstimate {
        value: CoefficientValue::exact(sup),
        witness: LambdaWitness { mu, nu, x },
    })
}

/// Exact one-step report: both coefficients plus the derived regime.
pub fn one_step_report(kernel: &AffineKernel) -> Result<CoefficientReport> {
    let alpha = alpha_one_step(kernel)?;
    let lambda = lambda_one_step(kernel)?;
    let regime = derive_regime(&alpha.value, &lambda.value);
    Ok(CoefficientReport {
        steps: 1,
        alpha,
        lambda,
        regime,
        kernel_fingerprint: kernel.fingerprint(),
    })
}

/// A bound `L` with `max_x ‖Q⁽ˢ⁾_μ(x,·) − Q⁽ˢ⁾_ν(x,·)‖ ≤ L·‖μ − ν‖`,
/// composed from the exact one-step coefficients through the product rule:
/// each factor contributes `λ₁` directly and forwards law perturbations at
/// rate `(1 − α₁) + λ₁`.
pub fn law_sensitivity_bound(lambda1: f64, alpha1: f64, steps: u32) -> f64 {
    let forward = (1.0 - alpha1) + lambda1;
    let mut geom = 0.0;
    let mut pow = 1.0;
    for _ in 0..steps {
        geom += pow;
        pow *= forward;
    }
    lambda1 * geom
}

fn validate_law_sensitivity(kernel: &AffineKernel, steps: u32, bound: f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6c_6d63);
    let space = kernel.space();
    let m = kernel.size();
    for _ in 0..1000 {
        let mu = random_distribution(space, &mut rng);
        let nu = random_distribution(space, &mut rng);
        let qm = k_step(kernel, &mu, steps)?;
        let qn = k_step(kernel, &nu, steps)?;
        let tvd = tv_between(mu.weights(), nu.weights());
        let num = (0..m)
            .map(|x| tv_between(qm.row(x), qn.row(x)))
            .fold(0.0_f64, f64::max);
        if num > bound * tvd + 1e-9 {
            return Err(Error::LipschitzBoundViolated {
                bound,
                observed: if tvd > 0.0 { num / tvd } else { num },
            });
        }
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct PairCand {
    v: f64,
    /// TV separation of the law pair (0 where irrelevant).
    tv: f64,
    // tie-break tuple, lexicographically ascending
    key: [usize; 4],
}

impl PairCand {
    const NONE: PairCand = PairCand { v: f64::NEG_INFINITY, tv: 0.0, key: [usize::MAX; 4] };

    fn better_than(&self, other: &PairCand) -> bool {
        self.v > other.v || (self.v == other.v && self.key < other.key)
    }

    /// Value quantized to 1e-9 buckets, so rounding-noise ties compare
    /// equal while the comparison stays exact (and reductions associative).
    fn bucket(&self) -> i64 {
        if self.v.is_finite() {
            (self.v * 1e9).floor() as i64
        } else {
            i64::MIN
        }
    }

    /// As [`Self::better_than`] but preferring wider pairs among
    /// noise-level value ties; wide maximizers make better-conditioned
    /// ratio witnesses.
    fn wider_than(&self, other: &PairCand) -> bool {
        let (sb, ob) = (self.bucket(), other.bucket());
        sb > ob
            || (sb == ob
                && (self.tv > other.tv || (self.tv == other.tv && self.key < other.key)))
    }

    fn merge(self, other: PairCand) -> PairCand {
        if other.better_than(&self) {
            other
        } else {
            self
        }
    }

    fn merge_wide(self, other: PairCand) -> PairCand {
        if other.wider_than(&self) {
            other
        } else {
            self
        }
    }
}

fn merge_vecs(mut a: Vec<PairCand>, b: Vec<PairCand>) -> Vec<PairCand> {
    for (s, o) in a.iter_mut().zip(b) {
        *s = s.merge(o);
    }
    a
}

/// Objective value and argmax states of `max_{x,y} ‖Qμ(x,·) − Qν(y,·)‖`.
fn alpha_objective(qm: &EvaluatedKernel, qn: &EvaluatedKernel) -> (f64, usize, usize) {
    let m = qm.size();
    let mut best = f64::NEG_INFINITY;
    let mut arg = (0, 0);
    for x in 0..m {
        for y in 0..m {
            let v = tv_between(qm.row(x), qn.row(y));
            if v > best {
                best = v;
                arg = (x, y);
            }
        }
    }
    (best, arg.0, arg.1)
}

/// Objective value and argmax state of `max_x ‖Qμ(x,·) − Qν(x,·)‖ / ‖μ − ν‖`.
fn lambda_objective(qm: &EvaluatedKernel, qn: &EvaluatedKernel, tvd: f64) -> (f64, usize) {
    let m = qm.size();
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for x in 0..m {
        let v = tv_between(qm.row(x), qn.row(x)) / tvd;
        if v > best {
            best = v;
            arg = x;
        }
    }
    (best, arg)
}

enum Objective {
    /// Maximize the row-pair TV distance.
    Alpha,
    /// Maximize the TV ratio subject to `‖μ − ν‖ ≥ floor`. The floor keeps
    /// the climb at its seed's scale: the quotient is numerically
    /// meaningless as the pair collapses, and diagonal limits are handled
    /// by constructed directional probes instead.
    Lambda { floor: f64 },
}

struct Refined {
    v: f64,
    mu: Vec<f64>,
    nu: Vec<f64>,
    x: usize,
    y: usize,
}

/// Moves must beat the incumbent by this much; gains below it are
/// floating-point noise and would let the climb wander off the optimum.
const MIN_IMPROVE: f64 = 1e-10;

/// Coordinate-wise hill climb from `(mu, nu)`, halving the move size from
/// `1/denominator` down to `min_step`. Moves shift mass `t` between two
/// coordinates of one measure; evaluation order is fixed, so the result is
/// deterministic.
fn refine_pair(
    kernel: &AffineKernel,
    steps: u32,
    denominator: u32,
    min_step: f64,
    objective: &Objective,
    mu0: &[f64],
    nu0: &[f64],
) -> Result<Refined> {
    let m = kernel.size();
    let eval = |w: &[f64]| -> Result<EvaluatedKernel> {
        k_step(kernel, &Distribution::from_arithmetic(w.to_vec())?, steps)
    };
    let score = |qm: &EvaluatedKernel, qn: &EvaluatedKernel, mu: &[f64], nu: &[f64]| -> Option<(f64, usize, usize)> {
        match objective {
            Objective::Alpha => {
                let (v, x, y) = alpha_objective(qm, qn);
                Some((v, x, y))
            }
            Objective::Lambda { floor } => {
                let tvd = tv_between(mu, nu);
                if tvd < *floor {
                    return None;
                }
                let (v, x) = lambda_objective(qm, qn, tvd);
                Some((v, x, 0))
            }
        }
    };

    let mut mu = mu0.to_vec();
    let mut nu = nu0.to_vec();
    let mut qm = eval(&mu)?;
    let mut qn = eval(&nu)?;
    let (mut best, mut bx, mut by) = score(&qm, &qn, &mu, &nu)
        .ok_or_else(|| Error::InvalidParameter("refinement started below the pair floor".into()))?;

    let mut t = 1.0 / denominator as f64;
    while t >= min_step {
        loop {
            let mut applied = false;
            // 0 = move mass within mu, 1 = within nu
            for side in 0..2 {
                for p in 0..m {
                    for q in 0..m {
                        if p == q {
                            continue;
                        }
                        let source = if side == 0 { &mu } else { &nu };
                        if source[p] < t - 1e-15 {
                            continue;
                        }
                        let mut moved = source.clone();
                        moved[p] = (moved[p] - t).max(0.0);
                        moved[q] += t;
                        let trial_q = eval(&moved)?;
                        let (tmu, tnu, tqm, tqn): (&[f64], &[f64], &EvaluatedKernel, &EvaluatedKernel) =
                            if side == 0 {
                                (&moved, &nu, &trial_q, &qn)
                            } else {
                                (&mu, &moved, &qm, &trial_q)
                            };
                        if let Some((v, x, y)) = score(tqm, tqn, tmu, tnu) {
                            if v > best + MIN_IMPROVE {
                                best = v;
                                bx = x;
                                by = y;
                                if side == 0 {
                                    mu = moved;
                                    qm = trial_q;
                                } else {
                                    nu = moved;
                                    qn = trial_q;
                                }
                                applied = true;
                            }
                        }
                    }
                }
            }
            if !applied {
                break;
            }
        }
        t *= 0.5;
    }
    Ok(Refined { v: best, mu, nu, x: bx, y: by })
}

/// Coefficients of the `steps`-step kernel.
///
/// `steps = 1` delegates to the exact operations. For `steps ≥ 2` both
/// coefficients are bracketed: the grid/refinement maximum is the lower end
/// and the upper end adds the final-mesh error scaled by
/// [`law_sensitivity_bound`] (validated on 10³ random pairs before use).
/// For the ratio objective the mesh error is divided by the witness TV
/// distance, floored at `pair_floor`.
pub fn coefficients_k_step(
    kernel: &AffineKernel,
    steps: u32,
    config: &SearchConfig,
) -> Result<CoefficientReport> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be ≥ 1".into()));
    }
    if steps == 1 {
        return one_step_report(kernel);
    }
    search_coefficients(kernel, steps, config)
}

/// Runs the bracketing search regardless of `steps`, including `steps = 1`
/// where [`coefficients_k_step`] would delegate to the exact operations.
/// The two paths are cross-checked against each other in the test suites.
pub fn search_coefficients(
    kernel: &AffineKernel,
    steps: u32,
    config: &SearchConfig,
) -> Result<CoefficientReport> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be ≥ 1".into()));
    }
    ensure_valid(kernel)?;
    if config.min_step <= 0.0 || config.pair_floor <= 0.0 {
        return Err(Error::InvalidParameter(
            "min_step and pair_floor must be positive".into(),
        ));
    }
    let m = kernel.size();
    let space = kernel.space();

    let pairs = grid_point_count(space, config.denominator).saturating_pow(2);
    if pairs > config.eval_cap as u128 {
        return Err(Error::EvalCapExceeded { pairs, cap: config.eval_cap });
    }
    let grid = simplex_grid_with_cap(space, config.denominator, config.eval_cap)?;
    let n = grid.len();

    // Global law-sensitivity bound from the exact one-step coefficients.
    let alpha1 = alpha_one_step(kernel)?.value.lower;
    let lambda1 = lambda_one_step(kernel)?.value.lower;
    let l_q = law_sensitivity_bound(lambda1, alpha1, steps);
    validate_law_sensitivity(kernel, steps, l_q)?;

    let composed: Vec<EvaluatedKernel> = grid
        .par_iter()
        .map(|mu| k_step(kernel, mu, steps))
        .collect::<Result<_>>()?;

    // ---- ergodicity coefficient -------------------------------------
    // Scan all ordered grid pairs and all state pairs; keep the global
    // best plus the best pair per (x, y) as refinement seeds.
    let scan = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = PairCand::NONE;
            let mut per_xy = vec![PairCand::NONE; m * m];
            for j in 0..n {
                for x in 0..m {
                    let row_i = composed[i].row(x);
                    for y in 0..m {
                        let v = tv_between(row_i, composed[j].row(y));
                        let cand = PairCand { v, tv: 0.0, key: [x, y, i, j] };
                        if cand.better_than(&best) {
                            best = cand;
                        }
                        let slot = &mut per_xy[x * m + y];
                        if cand.better_than(slot) {
                            *slot = cand;
                        }
                    }
                }
            }
            (best, per_xy)
        })
        .reduce(
            || (PairCand::NONE, vec![PairCand::NONE; m * m]),
            |(b1, v1), (b2, v2)| (b1.merge(b2), merge_vecs(v1, v2)),
        );
    let (grid_best, per_xy) = scan;

    let mut seeds: Vec<[usize; 4]> = vec![grid_best.key];
    for cand in &per_xy {
        if cand.v > f64::NEG_INFINITY && !seeds.contains(&cand.key) {
            seeds.push(cand.key);
        }
    }
    let mut alpha_best: Option<Refined> = None;
    for key in &seeds {
        let [_, _, i, j] = *key;
        let refined = refine_pair(
            kernel,
            steps,
            config.denominator,
            config.min_step,
            &Objective::Alpha,
            grid[i].weights(),
            grid[j].weights(),
        )?;
        if alpha_best.as_ref().is_none_or(|b| refined.v > b.v) {
            alpha_best = Some(refined);
        }
    }
    let alpha_best = alpha_best.expect("at least one refinement seed");

    // Combined TV radius of the final refinement lattice (both measures).
    let mesh = 2.0 * m as f64 * config.min_step;
    let sup_lower = alpha_best.v; // seeds include the grid best, so ≥ grid value
    let sup_upper = sup_lower + l_q * mesh;
    let alpha = AlphaEstimate {
        value: CoefficientValue {
            lower: (1.0 - sup_upper / 2.0).max(0.0),
            upper: (1.0 - sup_lower / 2.0).min(1.0),
            certification: Certification::Bracketed,
        },
        witness: AlphaWitness {
            mu: Distribution::from_arithmetic(alpha_best.mu)?,
            nu: Distribution::from_arithmetic(alpha_best.nu)?,
            x: alpha_best.x,
            y: alpha_best.y,
        },
    };

    // ---- law-sensitivity coefficient --------------------------------
    let floor = config.pair_floor;
    let scan = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = PairCand::NONE;
            let mut wide = PairCand::NONE;
            let mut per_x = vec![PairCand::NONE; m];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let tvd = tv_between(grid[i].weights(), grid[j].weights());
                if tvd < floor {
                    continue;
                }
                for (x, slot) in per_x.iter_mut().enumerate() {
                    let v = tv_between(composed[i].row(x), composed[j].row(x)) / tvd;
                    let cand = PairCand { v, tv: tvd, key: [x, i, j, 0] };
                    if cand.better_than(&best) {
                        best = cand;
                    }
                    if cand.wider_than(&wide) {
                        wide = cand;
                    }
                    if cand.better_than(slot) {
                        *slot = cand;
                    }
                }
            }
            (best, wide, per_x)
        })
        .reduce(
            || (PairCand::NONE, PairCand::NONE, vec![PairCand::NONE; m]),
            |(b1, w1, v1), (b2, w2, v2)| (b1.merge(b2), w1.merge_wide(w2), merge_vecs(v1, v2)),
        );
    let (lambda_grid_best, lambda_grid_wide, lambda_per_x) = scan;

    // Diagonal limits: probe ν = μ ± t(e_b − e_a) with t ↓ 0. The ratio may
    // be approached as ν → μ, which no fixed grid pair can witness.
    let t_floor = config.min_step.max(floor / 2.0);
    let probe_best = (0..n)
        .into_par_iter()
        .map(|i| {
            let mu = grid[i].weights();
            let mut best = (PairCand::NONE, Vec::new());
            for a in 0..m {
                for b in 0..m {
                    if a == b {
                        continue;
                    }
                    let mut t = 1.0 / config.denominator as f64;
                    let mut ti = 0usize;
                    while t >= t_floor {
                        if mu[a] >= t - 1e-15 {
                            let mut nu = mu.to_vec();
                            nu[a] -= t;
                            nu[b] += t;
                            let qn = k_step(
                                kernel,
                                &Distribution::from_arithmetic(nu.clone())?,
                                steps,
                            )?;
                            let tvd = tv_between(mu, &nu);
                            if tvd >= floor {
                                let (v, _) = lambda_objective(&composed[i], &qn, tvd);
                                let cand = PairCand { v, tv: tvd, key: [i, a, b, ti] };
                                if cand.better_than(&best.0) {
                                    best = (cand, nu);
                                }
                            }
                        }
                        t *= 0.5;
                        ti += 1;
                    }
                }
            }
            Ok(best)
        })
        .try_reduce(
            || (PairCand::NONE, Vec::new()),
            |a, b| Ok(if b.0.better_than(&a.0) { b } else { a }),
        )?;

    let mut lambda_seeds: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let push_seed = |mu: Vec<f64>, nu: Vec<f64>, seeds: &mut Vec<(Vec<f64>, Vec<f64>)>| {
        if !seeds.iter().any(|(a, b)| *a == mu && *b == nu) {
            seeds.push((mu, nu));
        }
    };
    if lambda_grid_best.v > f64::NEG_INFINITY {
        let [_, i, j, _] = lambda_grid_best.key;
        push_seed(grid[i].weights().to_vec(), grid[j].weights().to_vec(), &mut lambda_seeds);
    }
    if lambda_grid_wide.v > f64::NEG_INFINITY {
        let [_, i, j, _] = lambda_grid_wide.key;
        push_seed(grid[i].weights().to_vec(), grid[j].weights().to_vec(), &mut lambda_seeds);
    }
    for cand in &lambda_per_x {
        if cand.v > f64::NEG_INFINITY {
            let [_, i, j, _] = cand.key;
            push_seed(grid[i].weights().to_vec(), grid[j].weights().to_vec(), &mut lambda_seeds);
        }
    }
    if probe_best.0.v > f64::NEG_INFINITY {
        let i = probe_best.0.key[0];
        push_seed(grid[i].weights().to_vec(), probe_best.1.clone(), &mut lambda_seeds);
    }
    // Vertex pairs are the widest-separated laws and, for affine-in-law
    // kernels, the usual home of the ratio supremum.
    for a in 0..m {
        for b in (a + 1)..m {
            push_seed(
                Distribution::vertex(space, a).weights().to_vec(),
                Distribution::vertex(space, b).weights().to_vec(),
                &mut lambda_seeds,
            );
        }
    }

    let mut refined_candidates: Vec<Refined> = Vec::new();
    for (mu, nu) in &lambda_seeds {
        let seed_tv = tv_between(mu, nu);
        if seed_tv < floor {
            continue;
        }
        // Grid pairs may tighten down to a quarter grid cell; probe pairs
        // keep their own (smaller) scale.
        let seed_floor = floor.max(seed_tv.min(0.25 / config.denominator as f64));
        refined_candidates.push(refine_pair(
            kernel,
            steps,
            config.denominator,
            config.min_step,
            &Objective::Lambda { floor: seed_floor },
            mu,
            nu,
        )?);
    }

    // Among near-maximal candidates prefer the widest witness pair: equal
    // values at larger separation carry a smaller quotient mesh error.
    let lambda_best = {
        let top = refined_candidates
            .iter()
            .map(|r| r.v)
            .fold(f64::NEG_INFINITY, f64::max);
        refined_candidates
            .into_iter()
            .filter(|r| r.v >= top - 1e-9)
            .max_by(|a, b| {
                tv_between(&a.mu, &a.nu)
                    .partial_cmp(&tv_between(&b.mu, &b.nu))
                    .expect("witness separations are finite")
            })
    };

    let (lambda_lower, lambda_witness, witness_tv) = match lambda_best {
        Some(refined) => {
            let tvw = tv_between(&refined.mu, &refined.nu);
            (
                refined.v.max(0.0),
                LambdaWitness {
                    mu: Distribution::from_arithmetic(refined.mu)?,
                    nu: Distribution::from_arithmetic(refined.nu)?,
                    x: refined.x,
                },
                tvw,
            )
        }
        // Degenerate space (single grid point): no admissible pair exists
        // and the kernel cannot depend on the law.
        None => (
            0.0,
            LambdaWitness {
                mu: grid[0].clone(),
                nu: grid[0].clone(),
                x: 0,
            },
            0.0,
        ),
    };
    let denom_eff = (witness_tv - mesh).max(floor);
    // The composed sensitivity bound caps the coefficient outright, so the
    // quotient mesh error never pushes the bracket past it.
    let lambda_upper = (lambda_lower + 2.0 * l_q * mesh / denom_eff).min(l_q.max(lambda_lower));
    let lambda = LambdaEstimate {
        value: CoefficientValue {
            lower: lambda_lower,
            upper: lambda_upper,
            certification: Certification::Bracketed,
        },
        witness: lambda_witness,
    };

    let regime = derive_regime(&alpha.value, &lambda.value);
    Ok(CoefficientReport {
        steps,
        alpha,
        lambda,
        regime,
        kernel_fingerprint: kernel.fingerprint(),
    })
}

/// Certified conclusion of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Guarantee {
    OneStepExponential,
    OneStepLinear,
    TwoStepExponential,
    TwoStepLinear,
    NoGuarantee,
}

impl fmt::Display for Guarantee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Guarantee::OneStepExponential => "one_step_exponential",
            Guarantee::OneStepLinear => "one_step_linear",
            Guarantee::TwoStepExponential => "two_step_exponential",
            Guarantee::TwoStepLinear => "two_step_linear",
            Guarantee::NoGuarantee => "no_guarantee",
        })
    }
}

/// Which convergence theorem applies, from the one- and two-step reports.
///
/// The certified call uses the pessimistic bracket ends (upper `λ`, lower
/// `α`); the indicative call uses the optimistic ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeSummary {
    pub one_step: Regime,
    pub two_step_certified: Regime,
    pub two_step_indicative: Regime,
    pub guarantee: Guarantee,
}

pub fn classify(one: &CoefficientReport, two: &CoefficientReport) -> Result<RegimeSummary> {
    if one.steps != 1 || two.steps != 2 {
        return Err(Error::InvalidParameter(format!(
            "classify needs a one-step and a two-step report, got {} and {}",
            one.steps, two.steps
        )));
    }
    if one.kernel_fingerprint != two.kernel_fingerprint {
        return Err(Error::ReportMismatch);
    }
    let one_step = derive_regime(&one.alpha.value, &one.lambda.value);
    let two_certified = derive_regime(&two.alpha.value, &two.lambda.value);
    let optimistic_alpha = CoefficientValue::exact(two.alpha.value.upper);
    let optimistic_lambda = CoefficientValue::exact(two.lambda.value.lower);
    let two_indicative = derive_regime(&optimistic_alpha, &optimistic_lambda);
    let guarantee = match (one_step, two_certified) {
        (Regime::Exponential, _) => Guarantee::OneStepExponential,
        (Regime::Linear, _) => Guarantee::OneStepLinear,
        (_, Regime::Exponential) => Guarantee::TwoStepExponential,
        (_, Regime::Linear) => Guarantee::TwoStepLinear,
        _ => Guarantee::NoGuarantee,
    };
    Ok(RegimeSummary {
        one_step,
        two_step_certified: two_certified,
        two_step_indicative: two_indicative,
        guarantee,
    })
}
