//! Multi-cloud meta-algorithms: a single optimizer over the flattened
//! domain, one independent optimizer per provider, CloudBandit, and the
//! leave-one-out linear runtime predictor.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bbo::{run_bbo, BboKind, CandidateSet, Optimizer, SearchTrace, DEFAULT_INIT_DESIGN};
use crate::dataset::{ernest_features, ObjectiveTable, Target};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::space::{ConfigPoint, SearchSpace};

/// Default CloudBandit budget growth factor.
pub const DEFAULT_ETA: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub provider: usize,
    /// Evaluations spent on this provider.
    pub pulls: usize,
    pub best_value: Option<f64>,
    pub best_point: Option<ConfigPoint>,
    /// 1-based round after which the arm was eliminated.
    pub eliminated_round: Option<usize>,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiCloudResult {
    pub chosen_provider: usize,
    pub chosen_point: ConfigPoint,
    pub loss: f64,
    pub arms: Vec<ArmSummary>,
    /// One trace per optimizer instance (a single trace for the flattened
    /// adaptation, one per provider otherwise).
    pub traces: Vec<SearchTrace>,
    pub total_evals: usize,
    /// Sum of the target metric over every evaluation.
    pub search_expense: f64,
}

#[derive(Serialize)]
struct ArmJson<'a> {
    provider: &'a str,
    pulls: usize,
    best_value: Option<f64>,
    eliminated_round: Option<usize>,
}

#[derive(Serialize)]
struct ResultJson<'a> {
    chosen_provider: &'a str,
    chosen_config: String,
    chosen_nodes: u32,
    loss: f64,
    total_evals: usize,
    search_expense: f64,
    arms: Vec<ArmJson<'a>>,
}

impl MultiCloudResult {
    fn from_traces(space: &SearchSpace, traces: Vec<SearchTrace>, mut arms: Vec<ArmSummary>, chosen: usize) -> Result<Self> {
        for t in &traces {
            for e in t.entries() {
                let arm = &mut arms[e.point.provider];
                arm.pulls += 1;
                if arm.best_value.is_none_or(|b| e.value < b) {
                    arm.best_value = Some(e.value);
                    arm.best_point = Some(e.point.clone());
                }
            }
        }
        debug_assert_eq!(arms.len(), space.n_providers());
        let arm = &arms[chosen];
        let (Some(loss), Some(point)) = (arm.best_value, arm.best_point.clone()) else {
            return Err(Error::Integrity(format!("chosen provider {chosen} has no evaluations")));
        };
        Ok(Self {
            chosen_provider: chosen,
            chosen_point: point,
            loss,
            total_evals: traces.iter().map(SearchTrace::len).sum(),
            search_expense: traces.iter().map(SearchTrace::expense).sum(),
            arms,
            traces,
        })
    }

    pub fn to_json(&self, space: &SearchSpace) -> Result<serde_json::Value> {
        let doc = ResultJson {
            chosen_provider: space.provider(self.chosen_provider)?.name(),
            chosen_config: space.config_string(&self.chosen_point)?,
            chosen_nodes: self.chosen_point.nodes,
            loss: self.loss,
            total_evals: self.total_evals,
            search_expense: self.search_expense,
            arms: self
                .arms
                .iter()
                .map(|a| {
                    Ok(ArmJson {
                        provider: space.provider(a.provider)?.name(),
                        pulls: a.pulls,
                        best_value: a.best_value,
                        eliminated_round: a.eliminated_round,
                    })
                })
                .collect::<Result<_>>()?,
        };
        Ok(serde_json::to_value(doc)?)
    }
}

fn empty_arms(space: &SearchSpace) -> Vec<ArmSummary> {
    (0..space.n_providers())
        .map(|k| ArmSummary {
            provider: k,
            pulls: 0,
            best_value: None,
            best_point: None,
            eliminated_round: None,
            saturated: false,
        })
        .collect()
}

fn arm_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, &format!("arm/{k}"))
}

/// One optimizer over the union of every provider's points.
pub fn flattened_optimize<F>(space: &SearchSpace, objective: F, kind: BboKind, budget: usize, seed: u64) -> Result<MultiCloudResult>
where
    F: Fn(&ConfigPoint) -> Result<f64>,
{
    let trace = run_bbo(kind, CandidateSet::flattened(space)?, &objective, budget, seed)?;
    let chosen = trace
        .best()
        .ok_or_else(|| Error::Integrity("flattened search produced no evaluations".into()))?
        .point
        .provider;
    let mut arms = empty_arms(space);
    for arm in &mut arms {
        arm.saturated = kind != BboKind::RandomSearch && trace.len() == space.len();
    }
    MultiCloudResult::from_traces(space, vec![trace], arms, chosen)
}

/// Per-provider budgets: `floor(B/K)` each, remainder to the first providers.
pub fn split_budget(budget: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || budget < k {
        return Err(Error::Budget(format!("budget {budget} cannot cover {k} providers")));
    }
    let (q, r) = (budget / k, budget % k);
    Ok((0..k).map(|i| q + usize::from(i < r)).collect())
}

/// K independent optimizers, one per provider, splitting the budget equally.
pub fn independent_optimize<F>(space: &SearchSpace, objective: F, kind: BboKind, budget: usize, seed: u64) -> Result<MultiCloudResult>
where
    F: Fn(&ConfigPoint) -> Result<f64>,
{
    let budgets = split_budget(budget, space.n_providers())?;
    let mut traces = Vec::with_capacity(budgets.len());
    let mut arms = empty_arms(space);
    for (k, &b) in budgets.iter().enumerate() {
        let cands = CandidateSet::for_provider(space, k)?;
        let size = cands.len();
        let trace = run_bbo(kind, cands, &objective, b, arm_seed(seed, k))?;
        arms[k].saturated = kind != BboKind::RandomSearch && trace.len() == size;
        traces.push(trace);
    }
    let chosen = traces
        .iter()
        .enumerate()
        .filter_map(|(k, t)| t.best_value().map(|v| (k, v)))
        .fold(None::<(usize, f64)>, |acc, (k, v)| match acc {
            Some((_, bv)) if bv <= v => acc,
            _ => Some((k, v)),
        })
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Integrity("no provider produced an evaluation".into()))?;
    MultiCloudResult::from_traces(space, traces, arms, chosen)
}

/// Geometric per-round budgets `b_m = round(b1 * eta^(m-1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSchedule {
    pub b1: usize,
    pub eta: f64,
}

impl BudgetSchedule {
    pub fn new(b1: usize, eta: f64) -> Result<Self> {
        if b1 == 0 {
            return Err(Error::Budget("b1 must be >= 1".into()));
        }
        if !(eta > 1.0 && eta.is_finite()) {
            return Err(Error::Budget(format!("eta must be > 1, got {eta}")));
        }
        Ok(Self { b1, eta })
    }

    /// Pulls per active arm in 1-based round `m`.
    pub fn round_budget(&self, m: usize) -> usize {
        (self.b1 as f64 * self.eta.powi(m as i32 - 1)).round() as usize
    }

    /// Total evaluations over `k` rounds when no arm saturates.
    pub fn total(&self, k: usize) -> usize {
        (1..=k).map(|m| (k - m + 1) * self.round_budget(m)).sum()
    }
}

pub fn cb_total_budget(k: usize, b1: usize, eta: f64) -> Result<usize> {
    if k == 0 {
        return Err(Error::Budget("K must be >= 1".into()));
    }
    Ok(BudgetSchedule::new(b1, eta)?.total(k))
}

/// Largest `b1` whose total budget does not exceed `budget`.
pub fn cb_b1_for_budget(k: usize, eta: f64, budget: usize) -> Result<usize> {
    let min = cb_total_budget(k, 1, eta)?;
    if budget < min {
        return Err(Error::Budget(format!(
            "budget {budget} is below the minimum {min} for K={k}, eta={eta}"
        )));
    }
    let mut b1 = 1;
    while cb_total_budget(k, b1 + 1, eta)? <= budget {
        b1 += 1;
    }
    Ok(b1)
}

struct Arm {
    opt: Optimizer,
    eliminated_round: Option<usize>,
}

fn make_arms(space: &SearchSpace, kind: BboKind, seed: u64) -> Result<Vec<Arm>> {
    (0..space.n_providers())
        .map(|k| {
            let cands = CandidateSet::for_provider(space, k)?;
            let init = DEFAULT_INIT_DESIGN.min(cands.len());
            Ok(Arm {
                opt: Optimizer::new(kind, cands, arm_seed(seed, k), init)?,
                eliminated_round: None,
            })
        })
        .collect()
}

/// CloudBandit: successive elimination of providers with geometrically
/// growing per-arm budgets.
///
/// Round `m` pulls every active arm `b_m` times (one pull is one iteration of
/// that provider's optimizer, whose state persists across rounds). After each
/// of the first `K-1` rounds the active arm with the highest best-so-far loss
/// is eliminated; ties go to a saturated arm, then to the later provider.
/// Saturated arms stop consuming budget.
pub fn cloudbandit<F>(space: &SearchSpace, objective: F, kind: BboKind, b1: usize, eta: f64, seed: u64) -> Result<MultiCloudResult>
where
    F: Fn(&ConfigPoint) -> Result<f64>,
{
    run_cloudbandit(space, kind, b1, eta, seed, |arms: &mut [&mut Arm], b| {
        for arm in arms.iter_mut() {
            arm.opt.advance(b, &mut |p: &ConfigPoint| objective(p))?;
        }
        Ok(())
    })
}

/// [`cloudbandit`] with the active arms of each round advanced concurrently.
/// Results are identical to the sequential version.
#[cfg(feature = "parallel")]
pub fn cloudbandit_parallel<F>(space: &SearchSpace, objective: F, kind: BboKind, b1: usize, eta: f64, seed: u64) -> Result<MultiCloudResult>
where
    F: Fn(&ConfigPoint) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    run_cloudbandit(space, kind, b1, eta, seed, |arms: &mut [&mut Arm], b| {
        arms.par_iter_mut()
            .map(|arm| arm.opt.advance(b, &mut |p: &ConfigPoint| objective(p)).map(|_| ()))
            .collect::<Vec<Result<()>>>()
            .into_iter()
            .collect()
    })
}

fn run_cloudbandit<R>(space: &SearchSpace, kind: BboKind, b1: usize, eta: f64, seed: u64, mut run_round: R) -> Result<MultiCloudResult>
where
    R: FnMut(&mut [&mut Arm], usize) -> Result<()>,
{
    let schedule = BudgetSchedule::new(b1, eta)?;
    let k_total = space.n_providers();
    let mut arms = make_arms(space, kind, seed)?;
    for m in 1..=k_total {
        let b = schedule.round_budget(m);
        let mut active: Vec<&mut Arm> = arms.iter_mut().filter(|a| a.eliminated_round.is_none()).collect();
        run_round(&mut active, b)?;
        if m == k_total {
            break;
        }
        let worst = active
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                let la = a.opt.trace().best_value().unwrap_or(f64::INFINITY);
                let lb = b.opt.trace().best_value().unwrap_or(f64::INFINITY);
                la.total_cmp(&lb)
                    .then(a.opt.is_saturated().cmp(&b.opt.is_saturated()))
                    .then(ia.cmp(ib))
            })
            .map(|(i, _)| i)
            .expect("at least two active arms before the last round");
        active[worst].eliminated_round = Some(m);
    }
    let survivor = arms
        .iter()
        .position(|a| a.eliminated_round.is_none())
        .expect("exactly one arm survives");
    let mut summaries = empty_arms(space);
    for (s, a) in summaries.iter_mut().zip(&arms) {
        s.eliminated_round = a.eliminated_round;
        s.saturated = a.opt.is_saturated();
    }
    let traces = arms.into_iter().map(|a| a.opt.into_trace()).collect();
    MultiCloudResult::from_traces(space, traces, summaries, survivor)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedPoint {
    pub point: ConfigPoint,
    /// Canonical index of the point.
    pub index: usize,
    pub predicted: f64,
    /// The least-squares fit was degenerate and the training mean was used.
    pub fallback: bool,
}

/// All points ranked by predicted target, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPrediction {
    pub ranking: Vec<PredictedPoint>,
}

impl LinearPrediction {
    pub fn recommended(&self) -> &PredictedPoint {
        &self.ranking[0]
    }
}

/// Least-squares fit of the runtime scaling law on the given cluster sizes,
/// evaluated at `n`. Uses as many leading basis terms as there are training
/// sizes (at most four).
fn loo_fit(sizes: &[f64], runtimes: &[f64], n: f64) -> (f64, bool) {
    let q = sizes.len().min(4);
    let design = DMatrix::from_fn(sizes.len(), q, |r, c| ernest_features(sizes[r])[c]);
    let y = DVector::from_column_slice(runtimes);
    let svd = design.svd(true, true);
    let max_sv = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12 * max_sv).count();
    let mean = runtimes.iter().sum::<f64>() / runtimes.len() as f64;
    if runtimes.iter().all(|&r| r == runtimes[0]) {
        return (runtimes[0], false);
    }
    if rank < q {
        return (mean, true);
    }
    match svd.solve(&y, 1e-12 * max_sv) {
        Ok(coef) => {
            let x = ernest_features(n);
            let pred: f64 = coef.iter().zip(&x[..q]).map(|(c, f)| c * f).sum();
            if pred.is_finite() {
                (pred, false)
            } else {
                (mean, true)
            }
        }
        Err(_) => (mean, true),
    }
}

/// Leave-one-out linear predictor: for every (provider, configuration) and
/// every cluster size `n`, fits the runtime law on the other sizes and
/// predicts the held-out runtime. Cost predictions scale the predicted
/// runtime by the cell's listed price factor (`cost / runtime`).
pub fn linear_predict_loo(table: &ObjectiveTable, workload: usize, target: Target) -> Result<LinearPrediction> {
    let space = table.space();
    let sizes: Vec<f64> = space.node_counts().iter().map(|&n| f64::from(n)).collect();
    let nn = sizes.len();
    if nn < 2 {
        return Err(Error::Domain("leave-one-out needs at least two node counts".into()));
    }
    if workload >= table.workloads().len() {
        return Err(Error::Domain(format!("workload index {workload} out of range")));
    }
    let runtime = table.values(workload, Target::Time);
    let cost = table.values(workload, Target::Cost);
    let mut ranking = Vec::with_capacity(space.len());
    for (block_no, block) in runtime.chunks(nn).enumerate() {
        for j in 0..nn {
            let train_sizes: Vec<f64> = (0..nn).filter(|&i| i != j).map(|i| sizes[i]).collect();
            let train_rt: Vec<f64> = (0..nn).filter(|&i| i != j).map(|i| block[i]).collect();
            let (rt, fallback) = loo_fit(&train_sizes, &train_rt, sizes[j]);
            let index = block_no * nn + j;
            let predicted = match target {
                Target::Time => rt,
                Target::Cost => cost[index] * (rt / runtime[index]),
            };
            ranking.push(PredictedPoint {
                point: space.point_at(index)?,
                index,
                predicted,
                fallback,
            });
        }
    }
    ranking.sort_by(|a, b| a.predicted.total_cmp(&b.predicted).then(a.index.cmp(&b.index)));
    Ok(LinearPrediction { ranking })
}
