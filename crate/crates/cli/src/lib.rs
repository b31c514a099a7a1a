//! Command-line front end: `evaluate`, `run`, `reference` and `metrics`.
//!
//! Exit codes: 0 success (and, for `evaluate`, a converged feasible point),
//! 1 error, 2 constraint violation, 3 power flow non-convergence.

pub mod config;
pub mod io;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use morpd::decision::{analyze, BcsReport, DecisionParams, FcmParams};
use morpd::metrics::{build_reference_front, evaluate_front, MetricMode, MetricReport, ReferenceOptions};
use morpd::moea::{run_with, MoeaParams, RunOptions, RunReport, SolutionRow};
use morpd::network::{bundled_case, load_case, ControlVector};
use morpd::powerflow::{evaluate, Evaluation};
use morpd::Case;

use config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "morpd", version, about = "Multi-objective optimal reactive power dispatch")]
pub struct Cli {
    /// TOML file with defaults for any of the options below.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Power flow, objectives and constraint check for one control vector.
    Evaluate(EvaluateArgs),
    /// Optimize, then pick best compromise solutions.
    Run(RunArgs),
    /// Weighted-sum reference front.
    Reference(ReferenceArgs),
    /// GD, spread and IGD of a front against a reference front.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct CaseArg {
    /// Case file, or a bundled case name (ieee30, ieee118). Default ieee30.
    #[arg(long)]
    pub case: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub case: CaseArg,
    /// Control values `V_G.., tap ratio.., shunt Mvar..`, comma separated.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "controls")]
    pub vector: Option<String>,
    /// File with control values, or a front/BCS CSV (see --row).
    #[arg(long, value_name = "FILE")]
    pub controls: Option<PathBuf>,
    /// Data row to take from a CSV given with --controls, counted from 1.
    #[arg(long, default_value_t = 1)]
    pub row: usize,
    /// Print the evaluation as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub case: CaseArg,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Population size.
    #[arg(long)]
    pub pop: Option<usize>,
    /// Power flow evaluation budget.
    #[arg(long)]
    pub evals: Option<usize>,
    /// DE mutation factor.
    #[arg(long)]
    pub f: Option<f64>,
    /// DE crossover rate.
    #[arg(long)]
    pub cr: Option<f64>,
    /// Neighbours consulted by the KNN pre-selection classifier.
    #[arg(long)]
    pub knn_k: Option<usize>,
    /// Candidate offspring screened per parent; 1 turns pre-selection off.
    #[arg(long)]
    pub n_cand: Option<usize>,
    /// Preference clusters for decision making.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Decision weights for loss and voltage deviation, e.g. `0.5,0.5`.
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<[f64; 2]>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluation threads; results do not depend on this.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Skip clustering and BCS selection.
    #[arg(long)]
    pub no_decision: bool,
    /// Store the archive after every generation in report.json.
    #[arg(long)]
    pub snapshots: bool,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    #[command(flatten)]
    pub case: CaseArg,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of weights spread evenly over [0, 1].
    #[arg(long)]
    pub n_weights: Option<usize>,
    /// Evaluation budget of each single-objective run.
    #[arg(long)]
    pub evals: Option<usize>,
    /// Population of each single-objective run.
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub f: Option<f64>,
    #[arg(long)]
    pub cr: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Runs executed at once.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Front CSV (needs `ploss_mw` and `vd` columns).
    pub front: PathBuf,
    /// Reference front CSV.
    pub reference: PathBuf,
    /// Scale both sets by the reference front's range first.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long)]
    pub json: bool,
}

fn parse_weights(s: &str) -> std::result::Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err("expected two comma-separated weights".into()),
    }
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Violation,
    NonConvergence,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Violation => 2,
            Outcome::NonConvergence => 3,
        }
    }
}

pub fn resolve_case(arg: Option<&str>, cfg: &FileConfig) -> Result<(String, Case)> {
    let name = arg.map(str::to_string).or_else(|| cfg.case.clone()).unwrap_or_else(|| "ieee30".into());
    let path = Path::new(&name);
    let case = if path.exists() {
        load_case(path).with_context(|| format!("loading {name}"))?
    } else {
        bundled_case(&name)?
    };
    Ok((name, case))
}

pub fn execute(cli: Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Evaluate(a) => cmd_evaluate(a, &cfg),
        Command::Run(a) => cmd_run(a, &cfg),
        Command::Reference(a) => cmd_reference(a, &cfg),
        Command::Metrics(a) => cmd_metrics(a),
    }
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    case: &'a str,
    controls: Vec<f64>,
    #[serde(flatten)]
    evaluation: &'a Evaluation<f64>,
    feasible: bool,
}

pub fn cmd_evaluate(a: EvaluateArgs, cfg: &FileConfig) -> Result<Outcome> {
    let (name, case) = resolve_case(a.case.case.as_deref(), cfg)?;
    let values = match (&a.vector, &a.controls) {
        (Some(v), _) => io::parse_list(v)?,
        (None, Some(p)) => io::read_controls(p, a.row)?,
        (None, None) => bail!("give the control vector with --vector or --controls"),
    };
    let u = ControlVector::from_physical(&case, &values)?;
    let ev = evaluate(&case, &u)?;
    let outcome = if ev.violation.non_convergence {
        Outcome::NonConvergence
    } else if ev.violation.total > 0.0 {
        Outcome::Violation
    } else {
        Outcome::Ok
    };
    if a.json {
        let out = EvaluateOutput {
            case: &name,
            controls: u.to_physical(&case),
            evaluation: &ev,
            feasible: outcome == Outcome::Ok,
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(outcome);
    }
    if ev.violation.non_convergence {
        println!(
            "power flow did not converge ({} iterations, mismatch {:.3e} p.u.)",
            ev.iterations, ev.max_mismatch
        );
        return Ok(outcome);
    }
    let v = &ev.violation;
    println!("Ploss={:.4} MW, VD={:.4}", ev.objectives.p_loss, ev.objectives.vd);
    println!(
        "violation={:.6} (generator_q={:.6}, load_voltage={:.6}, branch_loading={:.6})",
        v.total, v.generator_q, v.load_voltage, v.branch_loading
    );
    println!(
        "converged in {} iterations, max mismatch {:.3e} p.u.",
        ev.iterations, ev.max_mismatch
    );
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedRun {
    pub case: String,
    pub moea: MoeaParams<f64>,
    pub decision: Option<DecisionParams<f64>>,
    pub jobs: usize,
}

#[derive(Serialize)]
struct RunOutput<'a> {
    config: &'a ResolvedRun,
    run: &'a RunReport,
    decision: Option<&'a BcsReport<f64>>,
}

pub fn resolve_run(a: &RunArgs, cfg: &FileConfig) -> Result<(ResolvedRun, Case)> {
    let (name, case) = resolve_case(a.case.case.as_deref(), cfg)?;
    let m = &cfg.moea;
    let d = MoeaParams::<f64>::default();
    let moea = MoeaParams {
        n: a.pop.or(m.pop).unwrap_or(d.n),
        eval_budget: a.evals.or(m.evals).unwrap_or(d.eval_budget),
        f: a.f.or(m.f).unwrap_or(d.f),
        cr: a.cr.or(m.cr).unwrap_or(d.cr),
        k: a.knn_k.or(m.knn_k).unwrap_or(d.k),
        n_cand: a.n_cand.or(m.n_cand).unwrap_or(d.n_cand),
        seed: a.seed.or(cfg.seed).unwrap_or(d.seed),
    };
    moea.validate()?;
    let decision = if a.no_decision {
        None
    } else {
        let s = &cfg.decision;
        let dd = DecisionParams::<f64>::default();
        let p = DecisionParams {
            fcm: FcmParams {
                n_clusters: a.clusters.or(s.clusters).unwrap_or(dd.fcm.n_clusters),
                fuzziness: s.fuzziness.unwrap_or(dd.fcm.fuzziness),
                restarts: s.restarts.unwrap_or(dd.fcm.restarts),
                seed: moea.seed,
                ..dd.fcm
            },
            weights: a.weights.or(s.weights).unwrap_or(dd.weights),
            rho: s.rho.unwrap_or(dd.rho),
        };
        p.validate()?;
        Some(p)
    };
    let jobs = a.jobs.or(cfg.jobs).unwrap_or(1);
    Ok((
        ResolvedRun {
            case: name,
            moea,
            decision,
            jobs,
        },
        case,
    ))
}

pub fn cmd_run(a: RunArgs, cfg: &FileConfig) -> Result<Outcome> {
    let (resolved, case) = resolve_run(&a, cfg)?;
    let out_dir = a.out.clone().or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let started = Instant::now();
    let (_, report) = run_with(
        &case,
        &resolved.moea,
        &RunOptions {
            jobs: resolved.jobs,
            snapshots: a.snapshots,
        },
    )?;
    if !report.front_from_archive {
        eprintln!("warning: no feasible solution found; reporting the best rank of the final population");
    }

    let mut files = vec![("front.csv", io::front_csv(&case, &report.front)?)];
    let mut bcs_rows = Vec::new();
    let decision = match &resolved.decision {
        Some(dp) => {
            let objs: Vec<[f64; 2]> = report.front.iter().map(|r| [r.p_loss, r.vd]).collect();
            let d = analyze(&objs, dp)?;
            for w in &d.warnings {
                eprintln!("warning: {w}");
            }
            let n_clusters = if d.bcs.len() == 1 { 1 } else { dp.fcm.n_clusters };
            bcs_rows = d
                .bcs
                .iter()
                .map(|b| (b.cluster, b.priority, report.front[b.index].clone()))
                .collect::<Vec<(usize, f64, SolutionRow)>>();
            files.push(("bcs.csv", io::bcs_csv(&case, &bcs_rows, n_clusters)?));
            Some(d)
        }
        None => None,
    };
    let json = serde_json::to_vec_pretty(&RunOutput {
        config: &resolved,
        run: &report,
        decision: decision.as_ref(),
    })?;
    files.push(("report.json", json));
    io::write_all(&out_dir, &files)?;

    println!(
        "{} evaluations over {} generations in {:.1} s; front of {} solutions",
        report.evaluations,
        report.generations,
        started.elapsed().as_secs_f64(),
        report.front.len()
    );
    let n_clusters = resolved.decision.map(|d| d.fcm.n_clusters).unwrap_or(1);
    for (c, p, r) in &bcs_rows {
        let name = io::preference_name(*c, if bcs_rows.len() == 1 { 1 } else { n_clusters });
        println!("BCS {} ({name}): Ploss={:.4} MW, VD={:.4}, priority={:.4}", c + 1, r.p_loss, r.vd, p);
    }
    println!("outputs in {}", out_dir.display());
    Ok(Outcome::Ok)
}

pub fn cmd_reference(a: ReferenceArgs, cfg: &FileConfig) -> Result<Outcome> {
    let (_, case) = resolve_case(a.case.case.as_deref(), cfg)?;
    let s = &cfg.reference;
    let d = ReferenceOptions::<f64>::default();
    let opts = ReferenceOptions {
        pop: a.pop.or(s.pop).unwrap_or(d.pop),
        f: a.f.or(s.f).unwrap_or(d.f),
        cr: a.cr.or(s.cr).unwrap_or(d.cr),
        budget: a.evals.or(s.evals).unwrap_or(d.budget),
        seed: a.seed.or(cfg.seed).unwrap_or(d.seed),
        jobs: a.jobs.or(cfg.jobs).unwrap_or(1),
    };
    let n_weights = a.n_weights.or(s.n_weights).unwrap_or(100);
    let out_dir = a.out.clone().or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let started = Instant::now();
    let front = build_reference_front(&case, n_weights, &opts)?;
    for w in &front.warnings {
        eprintln!("warning: {w}");
    }
    io::write_all(&out_dir, &[("reference.csv", io::points_csv(&front.points)?)])?;
    println!(
        "{} weighted runs in {:.1} s; {} non-dominated points written to {}",
        front.runs.len(),
        started.elapsed().as_secs_f64(),
        front.points.len(),
        out_dir.join("reference.csv").display()
    );
    Ok(Outcome::Ok)
}

pub fn compute_metrics(a: &MetricsArgs) -> Result<MetricReport<f64>> {
    let front = io::read_points(&a.front)?;
    let reference = io::read_points(&a.reference)?;
    let mode = if a.normalized {
        MetricMode::Normalized
    } else {
        MetricMode::Raw
    };
    Ok(evaluate_front(&front, &reference, mode)?)
}

pub fn cmd_metrics(a: MetricsArgs) -> Result<Outcome> {
    let m = compute_metrics(&a)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&m)?);
        return Ok(Outcome::Ok);
    }
    println!("GD      {:.6}", m.gd);
    match m.spread {
        Some(s) => println!("spread  {s:.6}"),
        None => println!("spread  n/a (fewer than two points)"),
    }
    println!("IGD     {:.6}", m.igd);
    let units = match m.mode {
        MetricMode::Raw => "raw",
        MetricMode::Normalized => "normalized",
    };
    println!("({} front points, {} reference points, {units} units)", m.n_approx, m.n_reference);
    Ok(Outcome::Ok)
}
