//! `mcopt` command-line tool.
//!
//! Exit codes: 0 on success, 1 for user errors (bad flags or input files),
//! 2 for internal failures. Output files are written to a temporary name
//! and renamed into place, so a failed command never leaves partial output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcopt::bbo::{BboKind, SearchTrace};
use mcopt::dataset::generate_synthetic;
use mcopt::experiment::{
    aggregate_savings, emit_report, read_regret_csv, read_savings_csv, run_plan, summary_table, write_atomic, Algorithm,
    ExperimentOutput, ExperimentPlan, DEFAULT_PRODUCTION_RUNS, DEFAULT_SEED,
};
use mcopt::multicloud::{cb_b1_for_budget, cloudbandit, flattened_optimize, independent_optimize, linear_predict_loo, DEFAULT_ETA};
use mcopt::{ConfigPoint, ObjectiveTable, Scenario, SearchSpace, Target};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mcopt", version, about = "Multi-cloud configuration search over offline benchmark tables")]
struct Cli {
    /// Base seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark table.
    Gen(GenArgs),
    /// Run one algorithm on one workload and print the result as JSON.
    Run(RunArgs),
    /// Run an experiment grid and write a regret/savings report.
    Sweep(SweepArgs),
    /// Savings study at a fixed budget and production-run count.
    Savings(SavingsArgs),
    /// Rebuild charts and the summary from an existing report directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct SpaceArg {
    /// Search-space JSON file; defaults to the built-in 3-provider space.
    #[arg(long)]
    space: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset CSV (`workload,provider,config,nodes,runtime_s,cost_usd`).
    #[arg(long)]
    data: PathBuf,

    #[command(flatten)]
    space: SpaceArg,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    space: SpaceArg,

    #[arg(long, default_value_t = 5)]
    workloads: usize,

    /// `neutral`, `ernest_exact`, or `dominant:<provider index>:<factor>`.
    #[arg(long, default_value = "neutral")]
    scenario: Scenario,

    #[arg(long)]
    out: PathBuf,

    /// Also write the generated price list.
    #[arg(long)]
    prices: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Algorithm, e.g. `rs`, `exhaustive`, `linear-pred`, `cb:rbfopt`,
    /// `flat:cherrypick`, `indep:bilal-cost`.
    #[arg(long)]
    algo: Algorithm,

    /// Workload name; defaults to the first workload in the table.
    #[arg(long)]
    workload: Option<String>,

    #[arg(long, default_value = "cost")]
    target: Target,

    /// Evaluation budget. For CloudBandit this selects the largest b1 that fits.
    #[arg(long)]
    budget: Option<usize>,

    /// CloudBandit initial per-arm budget.
    #[arg(long, conflicts_with = "budget")]
    b1: Option<usize>,

    /// CloudBandit budget growth factor.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,

    /// Also write the JSON result to this file.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write the evaluation trace as CSV; per-arm traces follow each other in provider order.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Comma-separated targets.
    #[arg(long, value_delimiter = ',', default_value = "cost,time")]
    targets: Vec<Target>,

    /// Repetitions per cell.
    #[arg(long, default_value_t = 50)]
    seeds: usize,

    /// Production runs N used for savings.
    #[arg(long = "runs", short = 'N', default_value_t = DEFAULT_PRODUCTION_RUNS)]
    runs: usize,

    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,

    /// Comma-separated workload names; defaults to all.
    #[arg(long, value_delimiter = ',')]
    workloads: Option<Vec<String>>,

    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,

    /// Report directory.
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    plan: PlanArgs,

    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', default_value = "rs,cb:rbfopt")]
    algos: Vec<Algorithm>,

    /// Comma-separated ascending budgets.
    #[arg(long, value_delimiter = ',', default_value = "11,22,33,44,55,66,77,88")]
    budgets: Vec<usize>,
}

#[derive(Args)]
struct SavingsArgs {
    #[command(flatten)]
    plan: PlanArgs,

    #[arg(long, value_delimiter = ',', default_value = "exhaustive,rs,cb:rbfopt")]
    algos: Vec<Algorithm>,

    #[arg(long, default_value_t = 33)]
    budget: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding `regret.csv` and `savings.csv`.
    #[arg(long)]
    dir: PathBuf,

    /// Output directory for charts; defaults to `--dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn user(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<mcopt::Error> for Failure {
    fn from(e: mcopt::Error) -> Self {
        Self {
            code: if e.is_user_error() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::new()
        .parse_env(env_logger::Env::new().filter_or("MCOPT_LOG", "error"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> CmdResult {
    let seed = cli.seed;
    match cli.command {
        Command::Gen(a) => {
            eprintln!("mcopt gen seed={seed}");
            cmd_gen(a, seed)
        }
        Command::Run(a) => {
            eprintln!("mcopt run seed={seed}");
            cmd_run(a, seed)
        }
        Command::Sweep(a) => {
            eprintln!("mcopt sweep seed={seed}");
            cmd_sweep(a, seed)
        }
        Command::Savings(a) => {
            eprintln!("mcopt savings seed={seed}");
            cmd_savings(a, seed)
        }
        Command::Report(a) => cmd_report(a),
    }
}

fn load_space(arg: &SpaceArg) -> Result<SearchSpace, Failure> {
    match &arg.space {
        Some(p) => Ok(SearchSpace::load(p)?),
        None => Ok(SearchSpace::reference()),
    }
}

fn load_table(args: &DataArgs) -> Result<ObjectiveTable, Failure> {
    let space = load_space(&args.space)?;
    Ok(ObjectiveTable::load_csv(&space, &args.data)?)
}

/// Output files go into an existing directory.
fn check_out_file(path: &Path) -> CmdResult {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(Failure::user(format!("output directory {} does not exist", parent.display())));
    }
    if path.is_dir() {
        return Err(Failure::user(format!("output path {} is a directory", path.display())));
    }
    Ok(())
}

/// An output directory either exists or can be created under an existing one.
fn check_out_dir(path: &Path) -> CmdResult {
    if path.exists() {
        if !path.is_dir() {
            return Err(Failure::user(format!("{} is not a directory", path.display())));
        }
        return Ok(());
    }
    let mut anc = path.parent();
    while let Some(a) = anc {
        if a.as_os_str().is_empty() || a.is_dir() {
            return Ok(());
        }
        if a.exists() {
            break;
        }
        anc = a.parent();
    }
    Err(Failure::user(format!("cannot create output directory {}", path.display())))
}

fn cmd_gen(a: GenArgs, seed: u64) -> CmdResult {
    check_out_file(&a.out)?;
    if let Some(p) = &a.prices {
        check_out_file(p)?;
    }
    let space = load_space(&a.space)?;
    let (table, prices) = generate_synthetic(&space, a.workloads, seed, a.scenario)?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    write_atomic(&a.out, &buf)?;
    if let Some(p) = &a.prices {
        let mut buf = Vec::new();
        prices.write_csv(&space, &mut buf)?;
        write_atomic(p, &buf)?;
    }
    eprintln!(
        "wrote {} workloads x {} points to {}",
        table.workloads().len(),
        space.len(),
        a.out.display()
    );
    Ok(())
}

fn traces_csv(space: &SearchSpace, traces: &[SearchTrace]) -> Result<Vec<u8>, Failure> {
    let mut out = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        let mut buf = Vec::new();
        t.write_csv(space, &mut buf)?;
        let text = String::from_utf8_lossy(&buf);
        let body = if i == 0 { &text[..] } else { text.split_once('\n').map_or("", |(_, rest)| rest) };
        out.extend_from_slice(body.as_bytes());
    }
    Ok(out)
}

fn cmd_run(a: RunArgs, seed: u64) -> CmdResult {
    if let Some(p) = &a.out {
        check_out_file(p)?;
    }
    if let Some(p) = &a.trace {
        check_out_file(p)?;
    }
    let table = load_table(&a.data)?;
    let space = table.space();
    let w = match &a.workload {
        Some(name) => table.workload_index(name)?,
        None => 0,
    };
    let target = a.target;
    let objective = |p: &ConfigPoint| table.lookup_index(w, p, target);
    let need_budget = || a.budget.ok_or_else(|| Failure::user(format!("--budget is required for {}", a.algo)));

    let (doc, traces) = match a.algo {
        Algorithm::LinearPredictor => {
            let pred = linear_predict_loo(&table, w, target)?;
            let best = pred.recommended();
            let values = table.values(w, target);
            let doc = json!({
                "chosen_provider": space.provider(best.point.provider)?.name(),
                "chosen_config": space.config_string(&best.point)?,
                "chosen_nodes": best.point.nodes,
                "loss": values[best.index],
                "predicted": best.predicted,
                "total_evals": values.len(),
                "search_expense": values.iter().sum::<f64>(),
                "fallback_cells": pred.ranking.iter().filter(|p| p.fallback).count(),
                "arms": [],
            });
            (doc, Vec::new())
        }
        algo => {
            let result = match algo {
                Algorithm::Flattened(BboKind::Exhaustive) => {
                    flattened_optimize(space, objective, BboKind::Exhaustive, a.budget.unwrap_or(space.len()), seed)?
                }
                Algorithm::Flattened(kind) => flattened_optimize(space, objective, kind, need_budget()?, seed)?,
                Algorithm::Independent(kind) => independent_optimize(space, objective, kind, need_budget()?, seed)?,
                Algorithm::CloudBandit(kind) => {
                    let b1 = match a.b1 {
                        Some(b1) => b1,
                        None => cb_b1_for_budget(space.n_providers(), a.eta, need_budget()?)?,
                    };
                    cloudbandit(space, objective, kind, b1, a.eta, seed)?
                }
                Algorithm::LinearPredictor => unreachable!("handled above"),
            };
            (result.to_json(space)?, result.traces)
        }
    };
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    if let Some(p) = &a.trace {
        write_atomic(p, &traces_csv(space, &traces)?)?;
    }
    if let Some(p) = &a.out {
        write_atomic(p, text.as_bytes())?;
    }
    print!("{text}");
    Ok(())
}

fn build_plan(p: &PlanArgs, algorithms: Vec<Algorithm>, budgets: Vec<usize>, seed: u64) -> Result<ExperimentPlan, Failure> {
    let plan = ExperimentPlan {
        algorithms,
        targets: p.targets.clone(),
        budgets,
        seeds: p.seeds,
        seed,
        production_runs: p.runs,
        eta: p.eta,
        workloads: p.workloads.clone(),
    };
    plan.validate()?;
    Ok(plan)
}

fn run_and_emit(p: &PlanArgs, plan: &ExperimentPlan) -> Result<ExperimentOutput, Failure> {
    check_out_dir(&p.out)?;
    let table = load_table(&p.data)?;
    let out = run_plan(&table, plan, p.jobs)?;
    emit_report(&out, &p.out)?;
    Ok(out)
}

fn cmd_sweep(a: SweepArgs, seed: u64) -> CmdResult {
    let plan = build_plan(&a.plan, a.algos, a.budgets, seed)?;
    let out = run_and_emit(&a.plan, &plan)?;
    print!("{}", summary_table(&out.regret)?);
    eprintln!("report written to {}", a.plan.out.display());
    Ok(())
}

fn cmd_savings(a: SavingsArgs, seed: u64) -> CmdResult {
    let plan = build_plan(&a.plan, a.algos, vec![a.budget], seed)?;
    let out = run_and_emit(&a.plan, &plan)?;
    print_savings(&out)?;
    eprintln!("report written to {}", a.plan.out.display());
    Ok(())
}

fn print_savings(out: &ExperimentOutput) -> CmdResult {
    println!(
        "{:<22} {:<6} {:>5} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "algorithm", "target", "B", "w_low", "q25", "median", "q75", "w_high"
    );
    for g in aggregate_savings(&out.savings)? {
        let s = g.stats;
        println!(
            "{:<22} {:<6} {:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            g.algorithm.to_string(),
            g.target.as_str(),
            g.budget,
            s.whisker_low,
            s.q25,
            s.median,
            s.q75,
            s.whisker_high
        );
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    let out_dir = a.out.clone().unwrap_or_else(|| a.dir.clone());
    check_out_dir(&out_dir)?;
    let open = |name: &str| {
        let p = a.dir.join(name);
        fs::File::open(&p).map_err(|e| Failure::user(format!("cannot open {}: {e}", p.display())))
    };
    let output = ExperimentOutput {
        regret: read_regret_csv(open("regret.csv")?)?,
        savings: read_savings_csv(open("savings.csv")?)?,
    };
    emit_report(&output, &out_dir)?;
    print!("{}", summary_table(&output.regret)?);
    if !output.savings.is_empty() {
        println!();
        print_savings(&output)?;
    }
    Ok(())
}
