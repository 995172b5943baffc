//! Black-box optimizers over a finite candidate set.
//!
//! Every engine exposes the same ask/tell protocol: [`Optimizer::suggest`]
//! proposes a point, the caller evaluates it, and [`Optimizer::observe`]
//! records the value. Surrogate-based engines never repeat a candidate and
//! report [`Suggestion::Saturated`] once every candidate has been evaluated.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::{ConfigPoint, EncodedPoint, SearchSpace};
use crate::surrogate::{Acquisition, ForestConfig, ForestModel, GpModel, RbfModel};

pub const DEFAULT_INIT_DESIGN: usize = 3;
/// Length of the RBF exploit/explore cycle; the last step explores.
const RBF_CYCLE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BboKind {
    RandomSearch,
    /// GP surrogate with a Matérn-5/2 kernel and expected improvement.
    CherryPickBo,
    /// GP surrogate with a lower confidence bound.
    BilalCostBo,
    /// Random-forest surrogate with probability of improvement.
    BilalTimeBo,
    /// Cubic RBF interpolant alternating exploitation and space filling.
    RbfOpt,
    Exhaustive,
}

impl BboKind {
    pub const ALL: [BboKind; 6] = [
        BboKind::RandomSearch,
        BboKind::CherryPickBo,
        BboKind::BilalCostBo,
        BboKind::BilalTimeBo,
        BboKind::RbfOpt,
        BboKind::Exhaustive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BboKind::RandomSearch => "rs",
            BboKind::CherryPickBo => "cherrypick",
            BboKind::BilalCostBo => "bilal-cost",
            BboKind::BilalTimeBo => "bilal-time",
            BboKind::RbfOpt => "rbfopt",
            BboKind::Exhaustive => "exhaustive",
        }
    }

    pub fn uses_surrogate(self) -> bool {
        !matches!(self, BboKind::RandomSearch | BboKind::Exhaustive)
    }
}

impl fmt::Display for BboKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BboKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rs" | "random" => BboKind::RandomSearch,
            "cherrypick" | "cp" => BboKind::CherryPickBo,
            "bilal-cost" => BboKind::BilalCostBo,
            "bilal-time" => BboKind::BilalTimeBo,
            "rbfopt" | "rbf" => BboKind::RbfOpt,
            "exhaustive" => BboKind::Exhaustive,
            other => return Err(Error::Parse(format!("unknown optimizer `{other}`"))),
        })
    }
}

/// Ordered candidates with their surrogate encodings and canonical labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    points: Vec<ConfigPoint>,
    encodings: Vec<EncodedPoint>,
    labels: Vec<String>,
}

impl CandidateSet {
    pub fn new(points: Vec<ConfigPoint>, encodings: Vec<EncodedPoint>, labels: Vec<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("candidate set is empty".into()));
        }
        if encodings.len() != points.len() || labels.len() != points.len() {
            return Err(Error::Domain("candidate encodings/labels do not match points".into()));
        }
        Ok(Self {
            points,
            encodings,
            labels,
        })
    }

    /// Provider `k`'s enumeration with per-provider encodings.
    pub fn for_provider(space: &SearchSpace, k: usize) -> Result<Self> {
        let points = space.enumerate_provider(k)?;
        let encodings = points.iter().map(|p| space.encode(p)).collect::<Result<_>>()?;
        let labels = points.iter().map(|p| space.point_string(p)).collect::<Result<_>>()?;
        Self::new(points, encodings, labels)
    }

    /// Every point of the space. With more than one provider the encodings
    /// span the flattened cross-provider domain.
    pub fn flattened(space: &SearchSpace) -> Result<Self> {
        if space.n_providers() == 1 {
            return Self::for_provider(space, 0);
        }
        let points = space.enumerate_all();
        let encodings = points.iter().map(|p| space.encode_flat(p)).collect::<Result<_>>()?;
        let labels = points.iter().map(|p| space.point_string(p)).collect::<Result<_>>()?;
        Self::new(points, encodings, labels)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ConfigPoint] {
        &self.points
    }

    pub fn encodings(&self) -> &[EncodedPoint] {
        &self.encodings
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// 1-based evaluation counter.
    pub step: usize,
    pub point: ConfigPoint,
    pub value: f64,
    pub cum_expense: f64,
    pub best_value: f64,
}

/// Ordered record of evaluations with the running best.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchTrace {
    entries: Vec<TraceEntry>,
    best: Option<usize>,
}

impl SearchTrace {
    pub fn push(&mut self, point: ConfigPoint, value: f64) {
        let cum_expense = self.expense() + value;
        let i = self.entries.len();
        if self.best.is_none_or(|b| value < self.entries[b].value) {
            self.best = Some(i);
        }
        let best_value = self.entries.get(self.best.unwrap_or(i)).map_or(value, |e| e.value);
        self.entries.push(TraceEntry {
            step: i + 1,
            point,
            value,
            cum_expense,
            best_value,
        });
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lowest recorded value; ties keep the earliest evaluation.
    pub fn best(&self) -> Option<&TraceEntry> {
        self.best.map(|b| &self.entries[b])
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best().map(|e| e.value)
    }

    /// Sum of all recorded values.
    pub fn expense(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.cum_expense)
    }

    /// CSV `step,provider,config,nodes,value,cum_expense,best_value`.
    pub fn write_csv<W: Write>(&self, space: &SearchSpace, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["step", "provider", "config", "nodes", "value", "cum_expense", "best_value"])?;
        for e in &self.entries {
            wtr.write_record([
                e.step.to_string(),
                space.provider(e.point.provider)?.name().to_string(),
                space.config_string(&e.point)?,
                e.point.nodes.to_string(),
                e.value.to_string(),
                e.cum_expense.to_string(),
                e.best_value.to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("writing trace", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Suggestion {
    Point(ConfigPoint),
    /// Every candidate has been evaluated; a non-repeating engine has nothing
    /// left to propose.
    Saturated,
}

/// Optimizer state for one candidate set.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: BboKind,
    candidates: CandidateSet,
    evaluated: Vec<bool>,
    /// Candidate index of each observation, in order.
    history: Vec<usize>,
    pending: Option<usize>,
    init_design: usize,
    model_steps: usize,
    rng: ChaCha8Rng,
    trace: SearchTrace,
    kappa: f64,
    forest: ForestConfig,
}

impl Optimizer {
    pub fn new(kind: BboKind, candidates: CandidateSet, seed: u64, init_design: usize) -> Result<Self> {
        if kind.uses_surrogate() {
            if init_design == 0 {
                return Err(Error::Domain(format!("{kind} needs init_design >= 1")));
            }
            if init_design > candidates.len() {
                return Err(Error::Domain(format!(
                    "init_design {init_design} exceeds {} candidates",
                    candidates.len()
                )));
            }
        }
        Ok(Self {
            kind,
            evaluated: vec![false; candidates.len()],
            candidates,
            history: Vec::new(),
            pending: None,
            init_design,
            model_steps: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            trace: SearchTrace::default(),
            kappa: crate::surrogate::DEFAULT_KAPPA,
            forest: ForestConfig::default(),
        })
    }

    pub fn kind(&self) -> BboKind {
        self.kind
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn trace(&self) -> &SearchTrace {
        &self.trace
    }

    pub fn into_trace(self) -> SearchTrace {
        self.trace
    }

    /// True when a non-repeating engine has evaluated every candidate.
    pub fn is_saturated(&self) -> bool {
        self.kind != BboKind::RandomSearch && self.evaluated.iter().all(|&e| e)
    }

    pub fn suggest(&mut self) -> Result<Suggestion> {
        if let Some(i) = self.pending {
            return Err(Error::Protocol(format!(
                "suggestion `{}` has not been observed",
                self.candidates.label(i)
            )));
        }
        let choice = match self.kind {
            BboKind::RandomSearch => Some(self.rng.gen_range(0..self.candidates.len())),
            BboKind::Exhaustive => self.evaluated.iter().position(|&e| !e),
            _ => self.surrogate_choice()?,
        };
        Ok(match choice {
            Some(i) => {
                self.pending = Some(i);
                Suggestion::Point(self.candidates.points[i].clone())
            }
            None => Suggestion::Saturated,
        })
    }

    pub fn observe(&mut self, p: &ConfigPoint, value: f64) -> Result<()> {
        let Some(i) = self.pending else {
            return Err(Error::Protocol("observe without a pending suggestion".into()));
        };
        if &self.candidates.points[i] != p {
            return Err(Error::Protocol(format!(
                "observed point differs from pending suggestion `{}`",
                self.candidates.label(i)
            )));
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Value(format!("objective value must be positive, got {value}")));
        }
        self.pending = None;
        self.evaluated[i] = true;
        self.history.push(i);
        self.trace.push(p.clone(), value);
        Ok(())
    }

    /// Suggests, evaluates and observes one point. Returns `false` on
    /// saturation.
    pub fn step<F>(&mut self, objective: &mut F) -> Result<bool>
    where
        F: FnMut(&ConfigPoint) -> Result<f64>,
    {
        match self.suggest()? {
            Suggestion::Saturated => Ok(false),
            Suggestion::Point(p) => {
                let value = objective(&p).map_err(|e| Error::Objective {
                    step: self.trace.len() + 1,
                    point: self.candidates.label(self.pending.expect("just suggested")).to_string(),
                    message: e.to_string(),
                })?;
                self.observe(&p, value)?;
                Ok(true)
            }
        }
    }

    /// Runs up to `iterations` steps; returns how many were performed.
    pub fn advance<F>(&mut self, iterations: usize, objective: &mut F) -> Result<usize>
    where
        F: FnMut(&ConfigPoint) -> Result<f64>,
    {
        for done in 0..iterations {
            if !self.step(objective)? {
                return Ok(done);
            }
        }
        Ok(iterations)
    }

    fn unevaluated(&self) -> Vec<usize> {
        (0..self.candidates.len()).filter(|&i| !self.evaluated[i]).collect()
    }

    fn surrogate_choice(&mut self) -> Result<Option<usize>> {
        let open = self.unevaluated();
        if open.is_empty() {
            return Ok(None);
        }
        if self.history.len() < self.init_design {
            return Ok(Some(open[sample(&mut self.rng, open.len(), 1).index(0)]));
        }
        let forest_seed: u64 = if self.kind == BboKind::BilalTimeBo { self.rng.gen() } else { 0 };
        let x: Vec<&[f64]> = self.history.iter().map(|&i| &*self.candidates.encodings[i]).collect();
        let y: Vec<f64> = self.trace.entries().iter().map(|e| e.value).collect();
        let best = self.trace.best_value().expect("history is non-empty");
        let enc = |i: usize| -> &[f64] { &self.candidates.encodings[i] };
        let scores: Vec<f64> = match self.kind {
            BboKind::CherryPickBo | BboKind::BilalCostBo => {
                let gp = GpModel::fit(&x, &y, true)?;
                let acq = if self.kind == BboKind::CherryPickBo {
                    Acquisition::ExpectedImprovement
                } else {
                    Acquisition::LowerConfidenceBound { kappa: self.kappa }
                };
                open.iter()
                    .map(|&i| {
                        let (m, s) = gp.posterior(enc(i));
                        acq.score(m, s, best)
                    })
                    .collect::<Result<_>>()?
            }
            BboKind::BilalTimeBo => {
                let forest = ForestModel::fit(&x, &y, &self.forest, forest_seed)?;
                open.iter()
                    .map(|&i| {
                        let (m, s) = forest.predict(enc(i));
                        Acquisition::ProbabilityOfImprovement.score(m, s, best)
                    })
                    .collect::<Result<_>>()?
            }
            BboKind::RbfOpt => {
                let explore = self.model_steps % RBF_CYCLE == RBF_CYCLE - 1;
                if explore {
                    open.iter()
                        .map(|&i| {
                            x.iter()
                                .map(|xe| crate::surrogate::sq_dist(xe, enc(i)))
                                .fold(f64::INFINITY, f64::min)
                        })
                        .collect()
                } else {
                    let logy: Vec<f64> = y.iter().map(|v| v.ln()).collect();
                    let rbf = RbfModel::fit(&x, &logy)?;
                    open.iter().map(|&i| -rbf.predict(enc(i))).collect()
                }
            }
            BboKind::RandomSearch | BboKind::Exhaustive => unreachable!("not surrogate kinds"),
        };
        self.model_steps += 1;
        let mut arg = 0;
        for (j, s) in scores.iter().enumerate() {
            if *s > scores[arg] {
                arg = j;
            }
        }
        Ok(Some(open[arg]))
    }
}

/// Runs one optimizer for at most `budget` evaluations with the default
/// initial design.
pub fn run_bbo<F>(kind: BboKind, candidates: CandidateSet, mut objective: F, budget: usize, seed: u64) -> Result<SearchTrace>
where
    F: FnMut(&ConfigPoint) -> Result<f64>,
{
    if budget == 0 {
        return Err(Error::Budget("budget must be >= 1".into()));
    }
    let init = DEFAULT_INIT_DESIGN.min(candidates.len());
    let mut opt = Optimizer::new(kind, candidates, seed, init)?;
    opt.advance(budget, &mut objective)?;
    Ok(opt.into_trace())
}
