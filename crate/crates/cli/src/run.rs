//! Command implementations.

use crate::args::{
    AnalyzeArgs, AuditArgs, Cli, Command, ExamplesArgs, Format, InvariantArgs, IterateArgs,
    KernelSource, OutputArgs, SimulateArgs, StartsChoice, ValidateArgs,
};
use crate::error::{CliError, CliResult};
use crate::output::{self, Meta};
use crate::specfile::KernelSpecFile;
use nlmc::builtin::{self, BuiltinExample};
use nlmc::contraction::{classify, coefficients_k_step, one_step_report};
use nlmc::dynamics::{
    audit_convergence, invariant, iterate, vertex_and_uniform_starts,
};
use nlmc::particles::law_error_curve;
use nlmc::{AffineKernel, Distribution};
use serde_json::{json, Value};

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate(args) => validate(args),
        Command::Analyze(args) => analyze(args),
        Command::Iterate(args) => iterate_cmd(args),
        Command::Invariant(args) => invariant_cmd(args),
        Command::Audit(args) => audit_cmd(args),
        Command::Simulate(args) => simulate_cmd(args),
        Command::Examples(args) => examples_cmd(args),
    }
}

/// The resolved kernel plus the builtin context (for reference-value notes)
/// and the manifest fragment describing the source.
struct ResolvedKernel {
    kernel: AffineKernel,
    builtin: Option<(BuiltinExample, f64)>,
    manifest: Value,
}

fn resolve_kernel(source: &KernelSource, validated: bool) -> CliResult<ResolvedKernel> {
    match (&source.builtin, &source.spec) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "--builtin and --spec are mutually exclusive".into(),
        )),
        (None, None) => Err(CliError::Usage(
            "a kernel source is required: --builtin <name> --gamma <g> or --spec <path>".into(),
        )),
        (Some(name), None) => {
            let example: BuiltinExample = name.parse().map_err(CliError::from)?;
            let gamma = source.gamma.ok_or_else(|| {
                CliError::Usage("--builtin requires --gamma".into())
            })?;
            let kernel = builtin::kernel(example, gamma)?;
            Ok(ResolvedKernel {
                kernel,
                builtin: Some((example, gamma)),
                manifest: json!({"builtin": example.name(), "gamma": gamma}),
            })
        }
        (None, Some(path)) => {
            if source.gamma.is_some() {
                return Err(CliError::Usage("--gamma applies only to --builtin".into()));
            }
            let text = std::fs::read_to_string(path)?;
            let spec = KernelSpecFile::parse(&text)?;
            let kernel = if validated {
                spec.to_kernel()?
            } else {
                spec.to_kernel_unchecked()?
            };
            Ok(ResolvedKernel {
                kernel,
                builtin: None,
                manifest: json!({"spec": path.display().to_string(), "name": spec.name}),
            })
        }
    }
}

/// Initial-law syntax: "uniform", "vertex:<i>" (1-based), or comma weights.
fn parse_mu0(text: &str, kernel: &AffineKernel) -> CliResult<Distribution> {
    let space = kernel.space();
    if text == "uniform" {
        return Ok(Distribution::uniform(space));
    }
    if let Some(index) = text.strip_prefix("vertex:") {
        let i: usize = index
            .parse()
            .map_err(|_| CliError::Usage(format!("bad vertex index '{index}'")))?;
        if i == 0 || i > space.size() {
            return Err(CliError::Usage(format!(
                "vertex index {i} outside [1, {}]",
                space.size()
            )));
        }
        return Ok(Distribution::vertex(space, i - 1));
    }
    let weights: Vec<f64> = text
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad weight '{w}' in --mu0")))
        })
        .collect::<CliResult<_>>()?;
    if weights.len() != space.size() {
        return Err(CliError::Usage(format!(
            "--mu0 has {} weights, kernel has {} states",
            weights.len(),
            space.size()
        )));
    }
    Distribution::new(weights).map_err(|e| CliError::Usage(e.to_string()))
}

fn emit(output: &OutputArgs, csv: String, jsonify: impl FnOnce() -> String) -> CliResult<()> {
    let content = match output.format {
        Format::Csv => csv,
        Format::Json => jsonify(),
    };
    output::write_artifact(&output.out, &content)
}

fn validate(args: ValidateArgs) -> CliResult<()> {
    let resolved = resolve_kernel(&args.source, false)?;
    let report = resolved.kernel.validate();
    let meta = Meta::new(
        "validate",
        json!({"source": resolved.manifest, "format": args.output.format}),
    );
    emit(
        &args.output,
        output::validate_csv(&meta, &report),
        || output::validate_json(&meta, &report),
    )?;
    if report.is_ok() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{} violation(s):\n{report}",
            report.violations.len()
        )))
    }
}

fn analyze(args: AnalyzeArgs) -> CliResult<()> {
    if args.steps == 0 {
        return Err(CliError::Usage("--steps must be ≥ 1".into()));
    }
    let resolved = resolve_kernel(&args.source, true)?;
    let config = args.search.to_config();
    let meta = Meta::new(
        "analyze",
        json!({
            "source": resolved.manifest,
            "steps": args.steps,
            "grid": config.denominator,
            "min_step": config.min_step,
            "pair_floor": config.pair_floor,
            "eval_cap": config.eval_cap,
            "format": args.output.format,
        }),
    );

    let one = one_step_report(&resolved.kernel)?;
    let mut reports = vec![&one];
    let two;
    let extra;
    let mut classification = None;
    if args.steps >= 2 {
        two = coefficients_k_step(&resolved.kernel, 2, &config)?;
        classification = Some(classify(&one, &two)?);
        reports.push(&two);
        if args.steps > 2 {
            extra = coefficients_k_step(&resolved.kernel, args.steps, &config)?;
            reports.push(&extra);
        }
    }
    let notes = match resolved.builtin {
        Some((example, gamma)) => builtin::discrepancy_notes(example, gamma, &one),
        None => Vec::new(),
    };
    emit(
        &args.output,
        output::analyze_csv(&meta, &reports, classification.as_ref(), &notes),
        || output::analyze_json(&meta, &reports, classification.as_ref(), &notes),
    )
}

fn iterate_cmd(args: IterateArgs) -> CliResult<()> {
    let resolved = resolve_kernel(&args.source, true)?;
    let mu0 = parse_mu0(&args.mu0, &resolved.kernel)?;
    let meta = Meta::new(
        "iterate",
        json!({
            "source": resolved.manifest,
            "steps": args.steps,
            "mu0": mu0.weights(),
            "format": args.output.format,
        }),
    );
    let traj = iterate(&resolved.kernel, &mu0, args.steps)?;
    emit(
        &args.output,
        output::trajectory_csv(&meta, &traj),
        || output::trajectory_json(&meta, &traj),
    )
}

fn invariant_cmd(args: InvariantArgs) -> CliResult<()> {
    let resolved = resolve_kernel(&args.source, true)?;
    let space = resolved.kernel.space();
    let starts = match args.starts {
        StartsChoice::Vertices => vertex_and_uniform_starts(space),
        StartsChoice::Uniform => vec![Distribution::uniform(space)],
        StartsChoice::File => {
            let path = args.starts_file.as_ref().ok_or_else(|| {
                CliError::Usage("--starts file requires --starts-file <path>".into())
            })?;
            let text = std::fs::read_to_string(path)?;
            let raw: Vec<Vec<f64>> =
                serde_json::from_str(&text).map_err(|e| CliError::Validation(e.to_string()))?;
            raw.into_iter()
                .map(|w| Distribution::new(w).map_err(|e| CliError::Validation(e.to_string())))
                .collect::<CliResult<_>>()?
        }
    };
    let meta = Meta::new(
        "invariant",
        json!({
            "source": resolved.manifest,
            "starts": args.starts,
            "tol": args.tol,
            "max_iters": args.max_iters,
            "format": args.output.format,
        }),
    );
    let result = invariant(&resolved.kernel, &starts, args.tol, args.max_iters)?;
    emit(
        &args.output,
        output::invariant_csv(&meta, &result),
        || output::invariant_json(&meta, &result),
    )
}

fn audit_cmd(args: AuditArgs) -> CliResult<()> {
    let resolved = resolve_kernel(&args.source, true)?;
    let mu0 = parse_mu0(&args.mu0, &resolved.kernel)?;
    let config = args.search.to_config();
    let meta = Meta::new(
        "audit",
        json!({
            "source": resolved.manifest,
            "steps": args.steps,
            "mu0": mu0.weights(),
            "grid": config.denominator,
            "min_step": config.min_step,
            "pair_floor": config.pair_floor,
            "eval_cap": config.eval_cap,
            "format": args.output.format,
        }),
    );
    let one = one_step_report(&resolved.kernel)?;
    let two = coefficients_k_step(&resolved.kernel, 2, &config)?;
    let report = audit_convergence(&resolved.kernel, &mu0, &two, &one, args.steps)?;
    emit(
        &args.output,
        output::audit_csv(&meta, &report),
        || output::audit_json(&meta, &report),
    )
}

fn simulate_cmd(args: SimulateArgs) -> CliResult<()> {
    let resolved = resolve_kernel(&args.source, true)?;
    let mu0 = parse_mu0(&args.mu0, &resolved.kernel)?;
    let n_list: Vec<usize> = args
        .particles
        .split(',')
        .map(|n| {
            n.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad ensemble size '{n}' in --particles")))
        })
        .collect::<CliResult<_>>()?;
    let meta = Meta::new(
        "simulate",
        json!({
            "source": resolved.manifest,
            "particles": n_list,
            "steps": args.steps,
            "replicas": args.replicas,
            "seed": args.seed,
            "mu0": mu0.weights(),
            "format": args.output.format,
        }),
    );
    let rows = law_error_curve(
        &resolved.kernel,
        &mu0,
        &n_list,
        args.steps,
        args.replicas,
        args.seed,
    )?;
    emit(
        &args.output,
        output::simulate_csv(&meta, &rows),
        || output::simulate_json(&meta, &rows),
    )
}

fn examples_cmd(args: ExamplesArgs) -> CliResult<()> {
    let example: BuiltinExample = args.builtin.parse().map_err(CliError::from)?;
    let kernel = builtin::kernel(example, args.gamma)?;
    let name = format!("{} gamma={}", example.name(), args.gamma);
    let spec = KernelSpecFile::from_kernel(&kernel, &name);
    let meta = Meta::new(
        "examples",
        json!({"builtin": example.name(), "gamma": args.gamma}),
    );
    // Spec files must stay parseable by --spec, so the reproducibility
    // header goes to stderr instead of into the artifact.
    eprint!("{}", meta.csv_header());
    let mut content = spec.to_json();
    content.push('\n');
    output::write_artifact(&args.out, &content)
}
