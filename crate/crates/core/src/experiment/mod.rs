//! Seeded evaluation harness: budget sweeps, regret, savings and box
//! statistics over offline tables.

mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bbo::BboKind;
use crate::dataset::{ObjectiveTable, Target};
use crate::error::{Error, Result};
use crate::multicloud::{cb_b1_for_budget, cloudbandit, flattened_optimize, independent_optimize, linear_predict_loo, DEFAULT_ETA};
use crate::seed::derive_seed;
use crate::space::ConfigPoint;

pub use report::{
    emit_report, read_regret_csv, read_savings_csv, regret_svg, savings_svg, summary_table, write_atomic, REGRET_HEADER, SAVINGS_HEADER,
};

/// Budget sweep used for the headline regret curves.
pub const PAPER_BUDGETS: [usize; 8] = [11, 22, 33, 44, 55, 66, 77, 88];
pub const DEFAULT_PRODUCTION_RUNS: usize = 64;
pub const DEFAULT_SEED: u64 = 20_220_516;

/// One entry of the algorithm matrix.
///
/// Text form: `rs`, `exhaustive`, `linear-pred`, or `<meta>:<component>`
/// with meta `flat`, `indep` or `cb` (long forms `flattened`, `independent`,
/// `cloudbandit`) and component a [`BboKind`] name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Flattened(BboKind),
    Independent(BboKind),
    CloudBandit(BboKind),
    LinearPredictor,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Flattened(BboKind::RandomSearch) => f.write_str("rs"),
            Algorithm::Flattened(BboKind::Exhaustive) => f.write_str("exhaustive"),
            Algorithm::Flattened(k) => write!(f, "flat:{k}"),
            Algorithm::Independent(k) => write!(f, "indep:{k}"),
            Algorithm::CloudBandit(k) => write!(f, "cb:{k}"),
            Algorithm::LinearPredictor => f.write_str("linear-pred"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "rs" | "random" => return Ok(Algorithm::Flattened(BboKind::RandomSearch)),
            "exhaustive" => return Ok(Algorithm::Flattened(BboKind::Exhaustive)),
            "linear-pred" | "linear" => return Ok(Algorithm::LinearPredictor),
            _ => {}
        }
        let Some((meta, component)) = s.split_once(':') else {
            return Err(Error::Parse(format!("unknown algorithm `{s}`")));
        };
        let kind: BboKind = component.parse()?;
        match meta {
            "flat" | "flattened" => Ok(Algorithm::Flattened(kind)),
            "indep" | "independent" => Ok(Algorithm::Independent(kind)),
            "cb" | "cloudbandit" => Ok(Algorithm::CloudBandit(kind)),
            _ => Err(Error::Parse(format!("unknown meta-algorithm `{meta}` in `{s}`"))),
        }
    }
}

impl Serialize for Algorithm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Result of one algorithm run on one (workload, target).
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub point: ConfigPoint,
    /// Target value of the returned point.
    pub found: f64,
    /// Sum of the target over every evaluation made during the search.
    pub expense: f64,
    pub evals: usize,
}

impl Algorithm {
    /// Runs the algorithm with budget `budget`.
    ///
    /// `exhaustive` scans the whole space and the linear predictor uses every
    /// measurement, so both ignore the budget. CloudBandit spends the largest
    /// schedule that fits: `b1 = cb_b1_for_budget(K, eta, budget)`.
    pub fn run(&self, table: &ObjectiveTable, workload: usize, target: Target, budget: usize, seed: u64, eta: f64) -> Result<RunOutcome> {
        let space = table.space();
        let objective = |p: &ConfigPoint| table.lookup_index(workload, p, target);
        let result = match *self {
            Algorithm::Flattened(BboKind::Exhaustive) => flattened_optimize(space, objective, BboKind::Exhaustive, space.len(), seed)?,
            Algorithm::Flattened(kind) => flattened_optimize(space, objective, kind, budget, seed)?,
            Algorithm::Independent(kind) => independent_optimize(space, objective, kind, budget, seed)?,
            Algorithm::CloudBandit(kind) => {
                let b1 = cb_b1_for_budget(space.n_providers(), eta, budget)?;
                cloudbandit(space, objective, kind, b1, eta, seed)?
            }
            Algorithm::LinearPredictor => {
                let pred = linear_predict_loo(table, workload, target)?;
                let values = table.values(workload, target);
                let best = pred.recommended();
                return Ok(RunOutcome {
                    point: best.point.clone(),
                    found: values[best.index],
                    expense: values.iter().sum(),
                    evals: values.len(),
                });
            }
        };
        Ok(RunOutcome {
            point: result.chosen_point,
            found: result.loss,
            expense: result.search_expense,
            evals: result.total_evals,
        })
    }
}

/// Minimum of the table and the first canonical point attaining it.
pub fn true_minimum(table: &ObjectiveTable, workload: usize, target: Target) -> Result<(ConfigPoint, f64)> {
    if workload >= table.workloads().len() {
        return Err(Error::Domain(format!("workload index {workload} out of range")));
    }
    let values = table.values(workload, target);
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    Ok((table.space().point_at(best)?, values[best]))
}

/// Relative distance to the optimum, `(found - fstar) / fstar`.
pub fn regret(found: f64, fstar: f64) -> Result<f64> {
    if !(fstar > 0.0 && fstar.is_finite()) {
        return Err(Error::Value(format!("true minimum must be positive, got {fstar}")));
    }
    if found < fstar {
        return Err(Error::Integrity(format!("found value {found} is below the true minimum {fstar}")));
    }
    Ok((found - fstar) / fstar)
}

/// Expected minimum of `budget` uniform draws with replacement from `values`.
pub fn expected_min_with_replacement(values: &[f64], budget: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("no values".into()));
    }
    if budget == 0 {
        return Err(Error::Budget("budget must be >= 1".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    let b = budget as f64;
    Ok(v.iter()
        .enumerate()
        .map(|(i, x)| {
            let i = i as f64 + 1.0;
            x * (((m - i + 1.0) / m).powf(b) - ((m - i) / m).powf(b))
        })
        .sum())
}

/// Exact expected regret of flattened random search with budget `budget`.
pub fn expected_rs_regret(table: &ObjectiveTable, workload: usize, target: Target, budget: usize) -> Result<f64> {
    let (_, fstar) = true_minimum(table, workload, target)?;
    let e = expected_min_with_replacement(table.values(workload, target), budget)?;
    // The expectation is a convex combination of values >= fstar; clamp
    // rounding below it.
    Ok(((e - fstar) / fstar).max(0.0))
}

/// `S = (N·R_rand − (C_opt + N·R_opt)) / (N·R_rand)`.
pub fn savings(c_opt: f64, r_opt: f64, r_rand: f64, n: usize) -> Result<f64> {
    if !(r_rand > 0.0 && r_rand.is_finite()) {
        return Err(Error::Value(format!("R_rand must be positive, got {r_rand}")));
    }
    if n == 0 {
        return Err(Error::Value("N must be >= 1".into()));
    }
    let n = n as f64;
    Ok((n * r_rand - (c_opt + n * r_opt)) / (n * r_rand))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub algorithms: Vec<Algorithm>,
    pub targets: Vec<Target>,
    pub budgets: Vec<usize>,
    /// Repetitions per cell.
    pub seeds: usize,
    pub seed: u64,
    /// Production runs `N` for savings.
    pub production_runs: usize,
    pub eta: f64,
    /// Workloads to evaluate; `None` means all.
    pub workloads: Option<Vec<String>>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            algorithms: vec![Algorithm::Flattened(BboKind::RandomSearch), Algorithm::CloudBandit(BboKind::RbfOpt)],
            targets: Target::ALL.to_vec(),
            budgets: PAPER_BUDGETS.to_vec(),
            seeds: 50,
            seed: DEFAULT_SEED,
            production_runs: DEFAULT_PRODUCTION_RUNS,
            eta: DEFAULT_ETA,
            workloads: None,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Domain("plan has no algorithms".into()));
        }
        if self.targets.is_empty() {
            return Err(Error::Domain("plan has no targets".into()));
        }
        if self.budgets.is_empty() {
            return Err(Error::Domain("plan has no budgets".into()));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) || self.budgets[0] == 0 {
            return Err(Error::Domain(format!("budgets must be positive and strictly ascending: {:?}", self.budgets)));
        }
        if self.seeds == 0 {
            return Err(Error::Domain("seeds must be >= 1".into()));
        }
        if self.production_runs == 0 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return Err(Error::Budget(format!("eta must be > 1, got {}", self.eta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRecord {
    pub workload: String,
    pub algorithm: Algorithm,
    pub target: Target,
    pub budget: usize,
    /// Seed the cell's algorithm ran with.
    pub seed: u64,
    pub found: f64,
    pub fstar: f64,
    pub regret: f64,
}

/// Savings of one (workload, algorithm, target, budget) group, from search
/// expense and chosen-point value averaged over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsRecord {
    pub workload: String,
    pub algorithm: Algorithm,
    pub target: Target,
    pub budget: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "C_opt")]
    pub c_opt: f64,
    #[serde(rename = "R_opt")]
    pub r_opt: f64,
    #[serde(rename = "R_rand")]
    pub r_rand: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub regret: Vec<RegretRecord>,
    pub savings: Vec<SavingsRecord>,
}

struct Cell {
    workload: usize,
    algorithm: Algorithm,
    target: Target,
    budget: usize,
    rep: usize,
}

/// Per-cell seed, a function of the plan seed and the cell's coordinates only.
pub fn cell_seed(plan_seed: u64, workload: &str, algorithm: Algorithm, target: Target, budget: usize, rep: usize) -> u64 {
    derive_seed(plan_seed, &format!("{workload}|{algorithm}|{target}|{budget}|{rep}"))
}

/// Executes every (workload, algorithm, target, budget, repetition) cell.
///
/// `jobs` bounds the worker threads (0 lets the pool decide); records are
/// identical for every value.
pub fn run_plan(table: &ObjectiveTable, plan: &ExperimentPlan, jobs: usize) -> Result<ExperimentOutput> {
    plan.validate()?;
    let workloads: Vec<usize> = match &plan.workloads {
        None => (0..table.workloads().len()).collect(),
        Some(names) => names.iter().map(|w| table.workload_index(w)).collect::<Result<_>>()?,
    };
    let mut cells = Vec::new();
    for &workload in &workloads {
        for &algorithm in &plan.algorithms {
            for &target in &plan.targets {
                for &budget in &plan.budgets {
                    for rep in 0..plan.seeds {
                        cells.push(Cell {
                            workload,
                            algorithm,
                            target,
                            budget,
                            rep,
                        });
                    }
                }
            }
        }
    }
    log::info!("running {} cells over {} workloads", cells.len(), workloads.len());
    let (regret, expenses) = execute(table, plan, &cells, jobs)?;
    let savings = savings_records(table, plan, &regret, &expenses, &workloads)?;
    Ok(ExperimentOutput { regret, savings })
}

fn run_cell(table: &ObjectiveTable, plan: &ExperimentPlan, cell: &Cell) -> Result<(RegretRecord, f64)> {
    let name = &table.workloads()[cell.workload];
    let seed = cell_seed(plan.seed, name, cell.algorithm, cell.target, cell.budget, cell.rep);
    let wrap = |e: Error| Error::Cell {
        cell: format!(
            "workload={name} algorithm={} target={} budget={} rep={}",
            cell.algorithm, cell.target, cell.budget, cell.rep
        ),
        source: Box::new(e),
    };
    let out = cell
        .algorithm
        .run(table, cell.workload, cell.target, cell.budget, seed, plan.eta)
        .map_err(wrap)?;
    let (_, fstar) = true_minimum(table, cell.workload, cell.target)?;
    let r = regret(out.found, fstar).map_err(wrap)?;
    log::debug!("{name} {} {} B={} rep={} regret={r}", cell.algorithm, cell.target, cell.budget, cell.rep);
    Ok((
        RegretRecord {
            workload: name.clone(),
            algorithm: cell.algorithm,
            target: cell.target,
            budget: cell.budget,
            seed,
            found: out.found,
            fstar,
            regret: r,
        },
        out.expense,
    ))
}

type CellResult = Result<(RegretRecord, f64)>;

#[cfg(feature = "parallel")]
fn map_cells(table: &ObjectiveTable, plan: &ExperimentPlan, cells: &[Cell], jobs: usize) -> Result<Vec<CellResult>> {
    use rayon::prelude::*;
    if jobs == 1 {
        return Ok(cells.iter().map(|c| run_cell(table, plan, c)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Integrity(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|c| run_cell(table, plan, c)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn map_cells(table: &ObjectiveTable, plan: &ExperimentPlan, cells: &[Cell], _jobs: usize) -> Result<Vec<CellResult>> {
    Ok(cells.iter().map(|c| run_cell(table, plan, c)).collect())
}

fn execute(table: &ObjectiveTable, plan: &ExperimentPlan, cells: &[Cell], jobs: usize) -> Result<(Vec<RegretRecord>, Vec<f64>)> {
    let results = map_cells(table, plan, cells, jobs)?;
    let mut records = Vec::with_capacity(results.len());
    let mut expenses = Vec::with_capacity(results.len());
    for r in results {
        let (rec, expense) = r?;
        records.push(rec);
        expenses.push(expense);
    }
    Ok((records, expenses))
}

fn savings_records(
    table: &ObjectiveTable,
    plan: &ExperimentPlan,
    regret: &[RegretRecord],
    expenses: &[f64],
    workloads: &[usize],
) -> Result<Vec<SavingsRecord>> {
    // (workload, algorithm, target, budget) -> (expense sum, found sum, count)
    let mut groups: BTreeMap<_, (f64, f64, usize)> = BTreeMap::new();
    let algo_pos = |a: Algorithm| plan.algorithms.iter().position(|&x| x == a).unwrap_or(usize::MAX);
    let target_pos = |t: Target| plan.targets.iter().position(|&x| x == t).unwrap_or(usize::MAX);
    let workload_pos = |w: &str| workloads.iter().position(|&i| table.workloads()[i] == w).unwrap_or(usize::MAX);
    for (rec, expense) in regret.iter().zip(expenses) {
        let key = (workload_pos(&rec.workload), algo_pos(rec.algorithm), target_pos(rec.target), rec.budget);
        let g = groups.entry(key).or_insert((0.0, 0.0, 0));
        g.0 += expense;
        g.1 += rec.found;
        g.2 += 1;
    }
    groups
        .into_iter()
        .map(|((w, a, t, budget), (c_sum, r_sum, count))| {
            let workload = workloads[w];
            let target = plan.targets[t];
            let values = table.values(workload, target);
            let r_rand = values.iter().sum::<f64>() / values.len() as f64;
            let c_opt = c_sum / count as f64;
            let r_opt = r_sum / count as f64;
            Ok(SavingsRecord {
                workload: table.workloads()[workload].clone(),
                algorithm: plan.algorithms[a],
                target,
                budget,
                n: plan.production_runs,
                c_opt,
                r_opt,
                r_rand,
                s: savings(c_opt, r_opt, r_rand, plan.production_runs)?,
            })
        })
        .collect()
}

/// Box-plot summary with quartiles interpolated linearly between order
/// statistics and whiskers at the furthest data within 1.5·IQR of the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxStats {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Domain("box statistics need at least one value".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Value(format!("non-finite value {v}")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q25 = quantile(&v, 0.25);
    let q75 = quantile(&v, 0.75);
    let iqr = q75 - q25;
    let lo_fence = q25 - 1.5 * iqr;
    let hi_fence = q75 + 1.5 * iqr;
    let whisker_low = v.iter().copied().find(|&x| x >= lo_fence).unwrap_or(q25).min(q25);
    let whisker_high = v.iter().rev().copied().find(|&x| x <= hi_fence).unwrap_or(q75).max(q75);
    Ok(BoxStats {
        median: quantile(&v, 0.5),
        q25,
        q75,
        whisker_low,
        whisker_high,
    })
}

/// Mean and spread of a metric for one (algorithm, target, budget) group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub algorithm: Algorithm,
    pub target: Target,
    pub budget: usize,
    pub count: usize,
    pub mean: f64,
    pub stats: BoxStats,
}

fn summarize(groups: BTreeMap<(Algorithm, Target, usize), Vec<f64>>) -> Result<Vec<GroupSummary>> {
    groups
        .into_iter()
        .map(|((algorithm, target, budget), mut values)| {
            // Sorting first makes the sum independent of record order.
            values.sort_by(f64::total_cmp);
            Ok(GroupSummary {
                algorithm,
                target,
                budget,
                count: values.len(),
                mean: values.iter().sum::<f64>() / values.len() as f64,
                stats: box_stats(&values)?,
            })
        })
        .collect()
}

/// Regret aggregated over workloads and seeds per (algorithm, target, budget).
pub fn aggregate_regret(records: &[RegretRecord]) -> Result<Vec<GroupSummary>> {
    let mut groups: BTreeMap<_, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.algorithm, r.target, r.budget)).or_default().push(r.regret);
    }
    summarize(groups)
}

/// Savings aggregated over workloads per (algorithm, target, budget).
pub fn aggregate_savings(records: &[SavingsRecord]) -> Result<Vec<GroupSummary>> {
    let mut groups: BTreeMap<_, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.algorithm, r.target, r.budget)).or_default().push(r.s);
    }
    summarize(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, Scenario};
    use crate::space::SearchSpace;

    fn table(seed: u64, workloads: usize) -> ObjectiveTable {
        generate_synthetic(&SearchSpace::reference(), workloads, seed, Scenario::Neutral).unwrap().0
    }

    #[test]
    fn algorithm_grammar_round_trips() {
        for s in ["rs", "exhaustive", "linear-pred", "flat:cherrypick", "indep:bilal-cost", "cb:rbfopt", "cb:bilal-time", "indep:rs"] {
            let a: Algorithm = s.parse().unwrap();
            assert_eq!(a.to_string(), s);
        }
        assert_eq!("cloudbandit:rbfopt".parse::<Algorithm>().unwrap(), Algorithm::CloudBandit(BboKind::RbfOpt));
        assert_eq!("flat:rs".parse::<Algorithm>().unwrap().to_string(), "rs");
        for bad in ["", "cb", "cb:", "foo:rbfopt", "cb:smac"] {
            assert!(bad.parse::<Algorithm>().is_err(), "{bad}");
        }
    }

    #[test]
    fn regret_examples() {
        assert_eq!(regret(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(regret(1.5, 1.0).unwrap(), 0.5);
        assert!((regret(0.1, 0.05).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(regret(0.9, 1.0), Err(Error::Integrity(_))));
        assert!(matches!(regret(1.0, 0.0), Err(Error::Value(_))));
    }

    #[test]
    fn true_minimum_constant_table() {
        let space = SearchSpace::reference();
        let t = ObjectiveTable::new(space, vec!["w".into()], vec![7.0; 88], vec![1.0; 88]).unwrap();
        let (p, f) = true_minimum(&t, 0, Target::Time).unwrap();
        assert_eq!(f, 7.0);
        assert_eq!(t.space().index_of(&p).unwrap(), 0);
        assert_eq!(expected_rs_regret(&t, 0, Target::Time, 5).unwrap(), 0.0);
    }

    #[test]
    fn true_minimum_of_dominant_provider() {
        let space = SearchSpace::reference();
        let (t, _) = generate_synthetic(&space, 4, 3, Scenario::Dominant { provider: 1, factor: 0.1 }).unwrap();
        for w in 0..4 {
            for target in Target::ALL {
                let (p, _) = true_minimum(&t, w, target).unwrap();
                assert_eq!(p.provider, 1);
                assert_eq!(true_minimum(&t, w, target).unwrap().0, p);
            }
        }
    }

    #[test]
    fn expected_min_single_draw_is_mean() {
        let v = [4.0, 1.0, 2.0, 9.0];
        assert!((expected_min_with_replacement(&v, 1).unwrap() - 4.0).abs() < 1e-12);
        // Two draws: enumerate all 16 ordered pairs.
        let brute: f64 = v.iter().flat_map(|a| v.iter().map(move |b| a.min(*b))).sum::<f64>() / 16.0;
        assert!((expected_min_with_replacement(&v, 2).unwrap() - brute).abs() < 1e-12);
        assert_eq!(expected_min_with_replacement(&[3.0], 50).unwrap(), 3.0);
    }

    #[test]
    fn expected_rs_regret_limits() {
        let t = table(5, 1);
        let values = t.values(0, Target::Cost);
        let (_, f) = true_minimum(&t, 0, Target::Cost).unwrap();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let one = expected_rs_regret(&t, 0, Target::Cost, 1).unwrap();
        assert!((one - (mean - f) / f).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for b in [1, 2, 5, 11, 33, 88, 880] {
            let r = expected_rs_regret(&t, 0, Target::Cost, b).unwrap();
            assert!(r <= prev);
            prev = r;
        }
        assert!(prev < 1e-3, "{prev}");
    }

    #[test]
    fn savings_identity() {
        assert_eq!(savings(0.0, 2.5, 2.5, 64).unwrap(), 0.0);
        let s = savings(10.0, 1.0, 2.0, 64).unwrap();
        assert!((s - (128.0 - 74.0) / 128.0).abs() < 1e-15);
        assert!(savings(1.0, 1.0, 0.0, 64).is_err());
        assert!(savings(1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn box_stats_examples() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((b.q25, b.median, b.q75), (2.0, 3.0, 4.0));
        assert_eq!((b.whisker_low, b.whisker_high), (1.0, 5.0));
        let b = box_stats(&[0.0, 0.0, 0.0, 0.0, 100.0]).unwrap();
        assert_eq!(b.whisker_high, 0.0);
        let b = box_stats(&[2.5; 6]).unwrap();
        assert_eq!(b, BoxStats { median: 2.5, q25: 2.5, q75: 2.5, whisker_low: 2.5, whisker_high: 2.5 });
        let b = box_stats(&[1.0, 2.0]).unwrap();
        assert_eq!((b.q25, b.median, b.q75), (1.25, 1.5, 1.75));
        assert!(box_stats(&[]).is_err());
    }

    #[test]
    fn plan_validation() {
        let mut p = ExperimentPlan::default();
        assert!(p.validate().is_ok());
        p.budgets = vec![22, 11];
        assert!(p.validate().is_err());
        p.budgets = vec![11];
        p.seeds = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn run_plan_record_counts_and_savings() {
        let t = table(8, 2);
        let plan = ExperimentPlan {
            algorithms: vec!["rs".parse().unwrap(), "exhaustive".parse().unwrap(), "cb:rbfopt".parse().unwrap()],
            targets: Target::ALL.to_vec(),
            budgets: vec![11, 33],
            seeds: 3,
            seed: 1,
            ..ExperimentPlan::default()
        };
        let out = run_plan(&t, &plan, 1).unwrap();
        assert_eq!(out.regret.len(), 2 * 3 * 2 * 2 * 3);
        assert_eq!(out.savings.len(), 2 * 3 * 2 * 2);
        for s in &out.savings {
            assert_eq!(s.s, savings(s.c_opt, s.r_opt, s.r_rand, s.n).unwrap());
            if s.algorithm == Algorithm::Flattened(BboKind::Exhaustive) {
                assert!(s.s < 0.0);
                assert!((s.c_opt - 88.0 * s.r_rand).abs() < 1e-9 * s.c_opt);
            }
        }
        for r in &out.regret {
            assert!(r.regret >= 0.0);
            if r.algorithm == Algorithm::Flattened(BboKind::Exhaustive) {
                assert_eq!(r.regret, 0.0);
            }
        }
    }

    #[test]
    fn cell_failure_names_coordinates() {
        let t = table(8, 1);
        let plan = ExperimentPlan {
            algorithms: vec!["cb:rbfopt".parse().unwrap()],
            targets: vec![Target::Time],
            budgets: vec![5],
            seeds: 1,
            ..ExperimentPlan::default()
        };
        let err = run_plan(&t, &plan, 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("workload=w0") && msg.contains("cb:rbfopt") && msg.contains("budget=5"), "{msg}");
        assert!(err.is_user_error());
    }

    #[test]
    fn aggregation_is_permutation_invariant() {
        let t = table(3, 2);
        let plan = ExperimentPlan {
            algorithms: vec!["rs".parse().unwrap(), "indep:rs".parse().unwrap()],
            targets: vec![Target::Cost],
            budgets: vec![3, 9],
            seeds: 7,
            ..ExperimentPlan::default()
        };
        let out = run_plan(&t, &plan, 1).unwrap();
        let a = aggregate_regret(&out.regret).unwrap();
        let mut rev = out.regret.clone();
        rev.reverse();
        rev.swap(0, 5);
        assert_eq!(a, aggregate_regret(&rev).unwrap());
    }
}
