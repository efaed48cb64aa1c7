//! Artifact rendering. Every artifact starts with a reproducibility
//! header (tool version, command, manifest echo); CSV carries it as `#`
//! comment lines, JSON as a `meta` object. State indices are 1-based in
//! artifacts.

use crate::error::CliResult;
use nlmc::contraction::{CoefficientReport, RegimeSummary};
use nlmc::dynamics::{AuditReport, InvariantResult, Trajectory};
use nlmc::particles::LawErrorRow;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

pub const TOOL: &str = "nlmc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub manifest: Value,
}

impl Meta {
    pub fn new(command: &'static str, manifest: Value) -> Self {
        Self { tool: TOOL, version: VERSION, command, manifest }
    }

    pub fn csv_header(&self) -> String {
        format!(
            "# {} {}\n# command: {}\n# manifest: {}\n",
            self.tool,
            self.version,
            self.command,
            serde_json::to_string(&self.manifest).expect("manifests serialize")
        )
    }
}

/// Writes to `--out` or stdout.
pub fn write_artifact(out: &Option<PathBuf>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            file.write_all(content.as_bytes())?;
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn join_weights(weights: &[f64]) -> String {
    weights.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("|")
}

#[derive(Serialize)]
struct WitnessDto {
    x: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<usize>,
    mu: Vec<f64>,
    nu: Vec<f64>,
}

#[derive(Serialize)]
struct CoefficientDto {
    lower: f64,
    upper: f64,
    certification: String,
    witness: WitnessDto,
}

#[derive(Serialize)]
pub struct ReportDto {
    steps: u32,
    alpha: CoefficientDto,
    lambda: CoefficientDto,
    regime: String,
}

impl ReportDto {
    pub fn from_report(report: &CoefficientReport) -> Self {
        Self {
            steps: report.steps,
            alpha: CoefficientDto {
                lower: report.alpha.value.lower,
                upper: report.alpha.value.upper,
                certification: report.alpha.value.certification.to_string(),
                witness: WitnessDto {
                    x: report.alpha.witness.x + 1,
                    y: Some(report.alpha.witness.y + 1),
                    mu: report.alpha.witness.mu.weights().to_vec(),
                    nu: report.alpha.witness.nu.weights().to_vec(),
                },
            },
            lambda: CoefficientDto {
                lower: report.lambda.value.lower,
                upper: report.lambda.value.upper,
                certification: report.lambda.value.certification.to_string(),
                witness: WitnessDto {
                    x: report.lambda.witness.x + 1,
                    y: None,
                    mu: report.lambda.witness.mu.weights().to_vec(),
                    nu: report.lambda.witness.nu.weights().to_vec(),
                },
            },
            regime: report.regime.to_string(),
        }
    }
}

#[derive(Serialize)]
pub struct ClassificationDto {
    one_step: String,
    two_step_certified: String,
    two_step_indicative: String,
    guarantee: String,
}

impl ClassificationDto {
    pub fn from_summary(summary: &RegimeSummary) -> Self {
        Self {
            one_step: summary.one_step.to_string(),
            two_step_certified: summary.two_step_certified.to_string(),
            two_step_indicative: summary.two_step_indicative.to_string(),
            guarantee: summary.guarantee.to_string(),
        }
    }
}

pub fn analyze_json(
    meta: &Meta,
    reports: &[&CoefficientReport],
    classification: Option<&RegimeSummary>,
    notes: &[String],
) -> String {
    let doc = json!({
        "meta": meta,
        "reports": reports.iter().map(|r| ReportDto::from_report(r)).collect::<Vec<_>>(),
        "classification": classification.map(ClassificationDto::from_summary),
        "notes": notes,
    });
    pretty(doc)
}

pub fn analyze_csv(
    meta: &Meta,
    reports: &[&CoefficientReport],
    classification: Option<&RegimeSummary>,
    notes: &[String],
) -> String {
    let mut out = meta.csv_header();
    if let Some(summary) = classification {
        out.push_str(&format!(
            "# classification: one_step={} two_step_certified={} two_step_indicative={} guarantee={}\n",
            summary.one_step, summary.two_step_certified, summary.two_step_indicative,
            summary.guarantee
        ));
    }
    for note in notes {
        out.push_str(&format!("# note: {note}\n"));
    }
    out.push_str(
        "steps,quantity,lower,upper,certification,regime,witness_x,witness_y,witness_mu,witness_nu\n",
    );
    for report in reports {
        out.push_str(&format!(
            "{},alpha,{},{},{},{},{},{},{},{}\n",
            report.steps,
            report.alpha.value.lower,
            report.alpha.value.upper,
            report.alpha.value.certification,
            report.regime,
            report.alpha.witness.x + 1,
            report.alpha.witness.y + 1,
            join_weights(report.alpha.witness.mu.weights()),
            join_weights(report.alpha.witness.nu.weights()),
        ));
        out.push_str(&format!(
            "{},lambda,{},{},{},{},{},,{},{}\n",
            report.steps,
            report.lambda.value.lower,
            report.lambda.value.upper,
            report.lambda.value.certification,
            report.regime,
            report.lambda.witness.x + 1,
            join_weights(report.lambda.witness.mu.weights()),
            join_weights(report.lambda.witness.nu.weights()),
        ));
    }
    out
}

pub fn validate_json(meta: &Meta, report: &nlmc::ValidationReport) -> String {
    pretty(json!({
        "meta": meta,
        "ok": report.is_ok(),
        "violations": violation_rows(report)
            .into_iter()
            .map(|(kind, x, j, k, magnitude)| json!({
                "kind": kind,
                "x": x,
                "j": j,
                "k": k,
                "magnitude": magnitude,
            }))
            .collect::<Vec<_>>(),
    }))
}

pub fn validate_csv(meta: &Meta, report: &nlmc::ValidationReport) -> String {
    let mut out = meta.csv_header();
    out.push_str(&format!("# ok: {}\n", report.is_ok()));
    out.push_str("kind,x,j,k,magnitude\n");
    for (kind, x, j, k, magnitude) in violation_rows(report) {
        let fmt = |v: Option<usize>| v.map(|i| i.to_string()).unwrap_or_default();
        out.push_str(&format!("{kind},{},{},{},{magnitude}\n", fmt(x), fmt(j), fmt(k)));
    }
    out
}

/// Violation row: (kind, x, j, k, magnitude) with 1-based indices.
type ViolationRow = (&'static str, Option<usize>, Option<usize>, Option<usize>, f64);

fn violation_rows(report: &nlmc::ValidationReport) -> Vec<ViolationRow> {
    use nlmc::kernels::Violation::*;
    report
        .violations
        .iter()
        .map(|v| match v {
            BaseRowSum { x, sum } => ("base_row_sum", Some(x + 1), None, None, *sum),
            CoeffRowSum { x, k, sum } => ("coeff_row_sum", Some(x + 1), None, Some(k + 1), *sum),
            VertexNegative { x, j, k, value } => {
                ("vertex_negative", Some(x + 1), Some(j + 1), Some(k + 1), *value)
            }
        })
        .collect()
}

pub fn trajectory_json(meta: &Meta, traj: &Trajectory) -> String {
    pretty(json!({
        "meta": meta,
        "laws": traj.laws.iter().map(|l| l.weights().to_vec()).collect::<Vec<_>>(),
        "tv_deltas": traj.tv_deltas,
    }))
}

pub fn trajectory_csv(meta: &Meta, traj: &Trajectory) -> String {
    let m = traj.laws[0].len();
    let mut out = meta.csv_header();
    out.push_str("# tv_delta: TV distance to the next law (empty on the final row)\n");
    let cols: Vec<String> = (1..=m).map(|j| format!("w{j}")).collect();
    out.push_str(&format!("n,{},tv_delta\n", cols.join(",")));
    for (n, law) in traj.laws.iter().enumerate() {
        let ws: Vec<String> = law.weights().iter().map(|w| w.to_string()).collect();
        let delta = traj.tv_deltas.get(n).map(|d| d.to_string()).unwrap_or_default();
        out.push_str(&format!("{n},{},{delta}\n", ws.join(",")));
    }
    out
}

pub fn invariant_json(meta: &Meta, result: &InvariantResult) -> String {
    pretty(json!({
        "meta": meta,
        "pi": result.pi.weights().to_vec(),
        "residual": result.residual,
        "iterations": result.iterations,
        "max_pairwise_gap": result.max_pairwise_gap,
        "starts": result.starts.iter().map(|s| s.weights().to_vec()).collect::<Vec<_>>(),
    }))
}

pub fn invariant_csv(meta: &Meta, result: &InvariantResult) -> String {
    let mut out = meta.csv_header();
    out.push_str(&format!(
        "# residual: {}\n# iterations: {}\n# max_pairwise_gap: {}\n# starts: {}\n",
        result.residual,
        result.iterations,
        result.max_pairwise_gap,
        result.starts.len()
    ));
    out.push_str("state,weight\n");
    for (i, w) in result.pi.weights().iter().enumerate() {
        out.push_str(&format!("{},{w}\n", i + 1));
    }
    out
}

pub fn audit_json(meta: &Meta, report: &AuditReport) -> String {
    pretty(json!({
        "meta": meta,
        "branch": report.branch,
        "d0": report.d0,
        "pi": report.pi.as_ref().map(|p| p.weights().to_vec()),
        "all_satisfied": report.all_satisfied(),
        "rows": report.rows.iter().map(|r| json!({
            "n": r.n,
            "observed": r.observed,
            "bound": r.bound,
            "slack": r.slack,
            "satisfied": r.satisfied,
        })).collect::<Vec<_>>(),
    }))
}

pub fn audit_csv(meta: &Meta, report: &AuditReport) -> String {
    let mut out = meta.csv_header();
    let branch = serde_json::to_value(report.branch)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    out.push_str(&format!(
        "# branch: {branch}\n# d0: {}\n# all_satisfied: {}\n",
        report.d0,
        report.all_satisfied()
    ));
    out.push_str("n,observed,bound,slack,satisfied\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n, row.observed, row.bound, row.slack, row.satisfied
        ));
    }
    out
}

pub fn simulate_json(meta: &Meta, rows: &[LawErrorRow]) -> String {
    pretty(json!({
        "meta": meta,
        "rows": rows,
    }))
}

pub fn simulate_csv(meta: &Meta, rows: &[LawErrorRow]) -> String {
    let mut out = meta.csv_header();
    out.push_str("n_particles,steps,mean_tv,std_tv,replicas,seed\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.n_particles, row.steps, row.mean_tv, row.std_tv, row.replicas, row.seed
        ));
    }
    out
}

fn pretty(value: Value) -> String {
    let mut text = serde_json::to_string_pretty(&value).expect("artifacts serialize");
    text.push('\n');
    text
}
