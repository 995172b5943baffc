//! Offline measurement tables standing in for the per-provider objectives.
//!
//! A table is complete: every (workload, point) pair of the space carries one
//! runtime and one cost. Partial tables are rejected at load time so that any
//! optimizer query during replay can be answered.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ConfigPoint, SearchSpace};

pub const DATASET_HEADER: [&str; 6] = ["workload", "provider", "config", "nodes", "runtime_s", "cost_usd"];
pub const PRICE_HEADER: [&str; 3] = ["provider", "config", "price_per_hour"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Time,
    Cost,
}

impl Target {
    pub const ALL: [Target; 2] = [Target::Time, Target::Cost];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Time => "time",
            Target::Cost => "cost",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" | "runtime" => Ok(Target::Time),
            "cost" => Ok(Target::Cost),
            other => Err(Error::Parse(format!("unknown target `{other}` (expected time|cost)"))),
        }
    }
}

/// Dollar cost of one run: runtime in hours times hourly node price times
/// cluster size.
pub fn derive_cost(runtime_s: f64, price_per_hour: f64, nodes: u32) -> Result<f64> {
    if !(runtime_s > 0.0 && runtime_s.is_finite()) {
        return Err(Error::Domain(format!("runtime must be positive, got {runtime_s}")));
    }
    if !(price_per_hour > 0.0 && price_per_hour.is_finite()) {
        return Err(Error::Domain(format!("price must be positive, got {price_per_hour}")));
    }
    if nodes == 0 {
        return Err(Error::Domain("node count must be positive".into()));
    }
    Ok(runtime_s / 3600.0 * price_per_hour * f64::from(nodes))
}

fn check_positive(what: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Value(format!("{what} must be positive and finite, got {v}")))
    }
}

/// Complete lookup from (workload, point) to runtime and cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveTable {
    space: SearchSpace,
    workloads: Vec<String>,
    /// Row-major by workload, then canonical point index.
    runtime: Vec<f64>,
    cost: Vec<f64>,
}

impl ObjectiveTable {
    /// Builds a table from dense per-workload value blocks laid out in
    /// canonical point order.
    pub fn new(space: SearchSpace, workloads: Vec<String>, runtime: Vec<f64>, cost: Vec<f64>) -> Result<Self> {
        if workloads.is_empty() {
            return Err(Error::Domain("table has no workloads".into()));
        }
        for (i, w) in workloads.iter().enumerate() {
            if w.is_empty() {
                return Err(Error::Domain("empty workload name".into()));
            }
            if workloads[..i].contains(w) {
                return Err(Error::Duplicate {
                    workload: w.clone(),
                    point: "*".into(),
                });
            }
        }
        let n = workloads.len() * space.len();
        if runtime.len() != n || cost.len() != n {
            return Err(Error::Domain(format!(
                "expected {n} values per metric, got {} runtimes and {} costs",
                runtime.len(),
                cost.len()
            )));
        }
        for &v in &runtime {
            check_positive("runtime_s", v)?;
        }
        for &v in &cost {
            check_positive("cost_usd", v)?;
        }
        Ok(Self {
            space,
            workloads,
            runtime,
            cost,
        })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn workloads(&self) -> &[String] {
        &self.workloads
    }

    pub fn workload_index(&self, w: &str) -> Result<usize> {
        self.workloads
            .iter()
            .position(|x| x == w)
            .ok_or_else(|| Error::Domain(format!("unknown workload `{w}`")))
    }

    /// All values of one workload for one target, in canonical point order.
    pub fn values(&self, workload: usize, target: Target) -> &[f64] {
        let m = self.space.len();
        let data = match target {
            Target::Time => &self.runtime,
            Target::Cost => &self.cost,
        };
        &data[workload * m..(workload + 1) * m]
    }

    /// Value at a canonical point index.
    pub fn value_at(&self, workload: usize, index: usize, target: Target) -> f64 {
        self.values(workload, target)[index]
    }

    pub fn lookup(&self, workload: &str, p: &ConfigPoint, target: Target) -> Result<f64> {
        let w = self.workload_index(workload)?;
        self.lookup_index(w, p, target)
    }

    pub fn lookup_index(&self, workload: usize, p: &ConfigPoint, target: Target) -> Result<f64> {
        if workload >= self.workloads.len() {
            return Err(Error::Domain(format!("workload index {workload} out of range")));
        }
        let i = self.space.index_of(p)?;
        Ok(self.value_at(workload, i, target))
    }

    pub fn read_csv<R: Read>(space: &SearchSpace, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut cols = [0usize; 6];
        for (slot, name) in cols.iter_mut().zip(DATASET_HEADER) {
            *slot = headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("dataset is missing column `{name}`")))?;
        }
        if let Some(extra) = headers.iter().find(|h| !DATASET_HEADER.contains(h)) {
            return Err(Error::Parse(format!("unknown dataset column `{extra}`")));
        }

        let m = space.len();
        let mut workloads: Vec<String> = Vec::new();
        let mut runtime: Vec<Option<f64>> = Vec::new();
        let mut cost: Vec<Option<f64>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |c: usize| rec.get(cols[c]).unwrap_or("");
            let row = line + 2;
            let w = field(0);
            if w.is_empty() {
                return Err(Error::Parse(format!("row {row}: empty workload")));
            }
            let k = space
                .provider_index(field(1))
                .ok_or_else(|| Error::Domain(format!("row {row}: unknown provider `{}`", field(1))))?;
            let assignment = space.parse_config(k, field(2))?;
            let nodes: u32 = field(3)
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: bad node count `{}`", field(3))))?;
            let p = ConfigPoint::new(k, nodes, assignment);
            let idx = space.index_of(&p)?;
            let parse = |c: usize, what: &str| -> Result<f64> {
                let v: f64 = field(c)
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {row}: bad {what} `{}`", field(c))))?;
                check_positive(what, v).map_err(|e| Error::Value(format!("row {row}: {e}")))
            };
            let r = parse(4, "runtime_s")?;
            let c = parse(5, "cost_usd")?;

            let wi = match workloads.iter().position(|x| x == w) {
                Some(i) => i,
                None => {
                    workloads.push(w.to_string());
                    runtime.resize(workloads.len() * m, None);
                    cost.resize(workloads.len() * m, None);
                    workloads.len() - 1
                }
            };
            let slot = wi * m + idx;
            if runtime[slot].is_some() {
                return Err(Error::Duplicate {
                    workload: w.to_string(),
                    point: space.point_string(&p)?,
                });
            }
            runtime[slot] = Some(r);
            cost[slot] = Some(c);
        }
        if workloads.is_empty() {
            return Err(Error::Parse("dataset has no rows".into()));
        }
        let mut rt = Vec::with_capacity(runtime.len());
        for (slot, (r, c)) in runtime.iter().zip(&cost).enumerate() {
            match (r, c) {
                (Some(r), Some(_)) => rt.push(*r),
                _ => {
                    return Err(Error::Incomplete {
                        workload: workloads[slot / m].clone(),
                        point: space.point_string(&space.point_at(slot % m)?)?,
                    })
                }
            }
        }
        let ct = cost.into_iter().map(|c| c.expect("checked")).collect();
        Self::new(space.clone(), workloads, rt, ct)
    }

    pub fn load_csv(space: &SearchSpace, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Self::read_csv(space, std::io::BufReader::new(file))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(DATASET_HEADER)?;
        let points = self.space.enumerate_all();
        for (wi, w) in self.workloads.iter().enumerate() {
            for (i, p) in points.iter().enumerate() {
                wtr.write_record([
                    w.as_str(),
                    self.space.providers()[p.provider].name(),
                    &self.space.config_string(p)?,
                    &p.nodes.to_string(),
                    &self.value_at(wi, i, Target::Time).to_string(),
                    &self.value_at(wi, i, Target::Cost).to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("writing dataset", e))?;
        Ok(())
    }
}

/// Hourly node price per provider configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceList {
    /// `prices[k][rank]` where `rank` is the configuration's position in the
    /// provider's canonical enumeration with node count dropped.
    prices: Vec<Vec<f64>>,
}

impl PriceList {
    pub fn new(space: &SearchSpace, prices: Vec<Vec<f64>>) -> Result<Self> {
        if prices.len() != space.n_providers() {
            return Err(Error::Domain("price list does not cover every provider".into()));
        }
        for (k, row) in prices.iter().enumerate() {
            if row.len() != space.providers()[k].config_count() {
                return Err(Error::Domain(format!(
                    "price list for `{}` has {} entries, expected {}",
                    space.providers()[k].name(),
                    row.len(),
                    space.providers()[k].config_count()
                )));
            }
            for &p in row {
                check_positive("price_per_hour", p)?;
            }
        }
        Ok(Self { prices })
    }

    pub fn price(&self, space: &SearchSpace, p: &ConfigPoint) -> Result<f64> {
        let rank = space.index_of(p)? - space.provider_range(p.provider)?.start;
        Ok(self.prices[p.provider][rank / space.node_counts().len()])
    }

    pub fn write_csv<W: Write>(&self, space: &SearchSpace, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(PRICE_HEADER)?;
        let nn = space.node_counts().len();
        for (k, row) in self.prices.iter().enumerate() {
            let points = space.enumerate_provider(k)?;
            for (rank, price) in row.iter().enumerate() {
                let p = &points[rank * nn];
                wtr.write_record([
                    space.providers()[k].name(),
                    &space.config_string(p)?,
                    &price.to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("writing price list", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(space: &SearchSpace, reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != PRICE_HEADER {
            return Err(Error::Parse(format!("price header must be {}", PRICE_HEADER.join(","))));
        }
        let mut prices: Vec<Vec<Option<f64>>> = space
            .providers()
            .iter()
            .map(|p| vec![None; p.config_count()])
            .collect();
        let nn = space.node_counts().len();
        for rec in rdr.records() {
            let rec = rec?;
            let k = space
                .provider_index(&rec[0])
                .ok_or_else(|| Error::Domain(format!("unknown provider `{}`", &rec[0])))?;
            let assignment = space.parse_config(k, &rec[1])?;
            let p = ConfigPoint::new(k, space.node_counts()[0], assignment);
            let rank = (space.index_of(&p)? - space.provider_range(k)?.start) / nn;
            let v: f64 = rec[2]
                .parse()
                .map_err(|_| Error::Parse(format!("bad price `{}`", &rec[2])))?;
            if prices[k][rank].replace(check_positive("price_per_hour", v)?).is_some() {
                return Err(Error::Duplicate {
                    workload: "-".into(),
                    point: format!("{}/{}", &rec[0], &rec[1]),
                });
            }
        }
        let prices = prices
            .into_iter()
            .enumerate()
            .map(|(k, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(rank, v)| {
                        v.ok_or_else(|| Error::Incomplete {
                            workload: "-".into(),
                            point: format!("{} config #{rank}", space.providers()[k].name()),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, prices)
    }
}

/// Shape of a generated benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Neutral,
    /// Multiply every runtime of `provider` by `factor`.
    Dominant { provider: usize, factor: f64 },
    /// Noise-free runtimes that follow the scaling law exactly, restricted
    /// to its first `min(4, |N| - 1)` terms.
    ErnestExact,
}

impl FromStr for Scenario {
    type Err = Error;

    /// `neutral`, `ernest_exact`, or `dominant:<provider index>:<factor>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neutral" => Ok(Scenario::Neutral),
            "ernest_exact" | "ernest-exact" => Ok(Scenario::ErnestExact),
            _ => {
                let parts: Vec<&str> = s.split(':').collect();
                match parts.as_slice() {
                    ["dominant", k, f] => {
                        let provider = k
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad provider index `{k}`")))?;
                        let factor = f
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad factor `{f}`")))?;
                        Ok(Scenario::Dominant { provider, factor })
                    }
                    _ => Err(Error::Parse(format!("unknown scenario `{s}`"))),
                }
            }
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Neutral => f.write_str("neutral"),
            Scenario::ErnestExact => f.write_str("ernest_exact"),
            Scenario::Dominant { provider, factor } => write!(f, "dominant:{provider}:{factor}"),
        }
    }
}

/// Basis of the runtime scaling law in cluster size `n`.
pub fn ernest_features(n: f64) -> [f64; 4] {
    [1.0, 1.0 / n, n.ln(), n]
}

const NOISE_SIGMA: f64 = 0.05;
const NOISE_CLAMP: f64 = 2.5;

/// Generates a complete synthetic table and the price list used to derive
/// its costs.
///
/// Runtime of workload `w` on configuration `c` of provider `k` follows
/// `θ0 + θ1/n + θ2 ln n + θ3 n` with positive coefficients built from a
/// workload scaling profile, a per-configuration speed, a per-provider
/// efficiency and a per-(workload, provider) communication factor, times a
/// clamped log-normal perturbation unless the scenario is `ErnestExact`.
pub fn generate_synthetic(
    space: &SearchSpace,
    n_workloads: usize,
    seed: u64,
    scenario: Scenario,
) -> Result<(ObjectiveTable, PriceList)> {
    if n_workloads == 0 {
        return Err(Error::Domain("n_workloads must be >= 1".into()));
    }
    if let Scenario::Dominant { provider, factor } = scenario {
        space.provider(provider)?;
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!("dominant factor must be positive, got {factor}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Hardware: per-config speed and price, per-provider efficiency.
    let mut speed = Vec::new();
    let mut prices = Vec::new();
    let mut efficiency = Vec::new();
    for prov in space.providers() {
        let base_price = rng.gen_range(0.09..0.13);
        efficiency.push(rng.gen_range(0.9..1.15));
        let mut sp = Vec::new();
        let mut pr = Vec::new();
        for _ in 0..prov.config_count() {
            let s: f64 = rng.gen_range(0.8..1.4);
            sp.push(s);
            pr.push(base_price * s.powf(0.9) * rng.gen_range(0.95..1.05));
        }
        speed.push(sp);
        prices.push(pr);
    }
    let prices = PriceList::new(space, prices)?;

    let m = space.len();
    let nn = space.node_counts().len();
    let workloads: Vec<String> = (0..n_workloads).map(|i| format!("w{i}")).collect();
    // Leave-one-out fits see |N|-1 sizes, so an exact table only uses as
    // many leading terms as such a fit can identify.
    let exact_terms = nn.saturating_sub(1).clamp(1, 4);
    let mut runtime = Vec::with_capacity(n_workloads * m);
    let mut cost = Vec::with_capacity(n_workloads * m);
    for _ in 0..n_workloads {
        let scale = rng.gen_range(60f64.ln()..1800f64.ln()).exp();
        let serial = rng.gen_range(0.1..0.3);
        let parallel = rng.gen_range(0.5..1.0);
        let log_term = rng.gen_range(0.0..0.1);
        let comm = rng.gen_range(0.0..0.03);
        for k in 0..space.n_providers() {
            let comm_k = comm * rng.gen_range(0.5..2.0);
            let dominance = match scenario {
                Scenario::Dominant { provider, factor } if provider == k => factor,
                _ => 1.0,
            };
            for (rank, &sp) in speed[k].iter().enumerate() {
                let affinity = rng.gen_range(0.92..1.08);
                let mult = scale * affinity * efficiency[k] / sp * dominance;
                let mut theta = [serial * mult, parallel * mult, log_term * mult, comm_k * mult];
                if scenario == Scenario::ErnestExact {
                    for t in theta.iter_mut().skip(exact_terms) {
                        *t = 0.0;
                    }
                }
                for j in 0..nn {
                    let n = space.node_counts()[j];
                    let law: f64 = ernest_features(f64::from(n))
                        .iter()
                        .zip(theta)
                        .map(|(x, t)| x * t)
                        .sum();
                    let r = if scenario == Scenario::ErnestExact {
                        law
                    } else {
                        let z: f64 = rng.sample(StandardNormal);
                        law * (NOISE_SIGMA * z.clamp(-NOISE_CLAMP, NOISE_CLAMP)).exp()
                    };
                    runtime.push(r);
                    cost.push(derive_cost(r, prices.prices[k][rank], n)?);
                }
            }
        }
    }
    let table = ObjectiveTable::new(space.clone(), workloads, runtime, cost)?;
    Ok((table, prices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Param, ProviderSpace};
    use nalgebra::{DMatrix, DVector};

    fn small_space() -> SearchSpace {
        SearchSpace::new(
            vec![
                ProviderSpace::new("a", vec![Param::new("t", ["x", "y"])]).unwrap(),
                ProviderSpace::new("b", vec![Param::new("t", ["z"])]).unwrap(),
            ],
            vec![1, 2],
        )
        .unwrap()
    }

    #[test]
    fn derive_cost_formula() {
        assert!((derive_cost(3600.0, 0.10, 4).unwrap() - 0.40).abs() < 1e-12);
        assert!((derive_cost(1800.0, 0.20, 2).unwrap() - 0.20).abs() < 1e-12);
        assert_eq!(derive_cost(3600.0, 1.0, 1).unwrap(), 1.0);
        assert!(derive_cost(0.0, 1.0, 1).is_err());
        assert!(derive_cost(1.0, -1.0, 1).is_err());
        assert!(derive_cost(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn derive_cost_is_linear_in_each_argument() {
        let base = derive_cost(1234.0, 0.3, 3).unwrap();
        assert!((derive_cost(2468.0, 0.3, 3).unwrap() - 2.0 * base).abs() < 1e-12);
        assert!((derive_cost(1234.0, 0.9, 3).unwrap() - 3.0 * base).abs() < 1e-12);
        assert!((derive_cost(1234.0, 0.3, 6).unwrap() - 2.0 * base).abs() < 1e-12);
    }

    #[test]
    fn lookup_reads_both_targets() {
        let s = small_space();
        let rt = vec![120.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ct = vec![0.05, 0.2, 0.3, 0.4, 0.5, 0.6];
        let t = ObjectiveTable::new(s.clone(), vec!["w0".into()], rt, ct).unwrap();
        let p0 = s.point_at(0).unwrap();
        assert_eq!(t.lookup("w0", &p0, Target::Time).unwrap(), 120.0);
        assert_eq!(t.lookup("w0", &p0, Target::Cost).unwrap(), 0.05);
        assert_eq!(
            t.lookup("w0", &p0, Target::Time).unwrap(),
            t.lookup("w0", &p0, Target::Time).unwrap()
        );
        assert!(t.lookup("w9", &p0, Target::Time).is_err());
        assert!(t.lookup("w0", &ConfigPoint::new(0, 7, vec![0]), Target::Time).is_err());
    }

    fn csv_of(space: &SearchSpace) -> String {
        let (t, _) = generate_synthetic(space, 2, 1, Scenario::Neutral).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn load_reference_sized_csv() {
        let s = SearchSpace::reference();
        let (t, _) = generate_synthetic(&s, 1, 3, Scenario::Neutral).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = ObjectiveTable::read_csv(&s, buf.as_slice()).unwrap();
        assert_eq!(back.values(0, Target::Time).len(), 88);
        assert_eq!(back, t);
    }

    #[test]
    fn missing_point_names_canonical_string() {
        let s = small_space();
        let text = csv_of(&s);
        let lines: Vec<&str> = text.lines().collect();
        let dropped: String = lines
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 3)
            .map(|(_, l)| format!("{l}\n"))
            .collect();
        match ObjectiveTable::read_csv(&s, dropped.as_bytes()) {
            Err(Error::Incomplete { workload, point }) => {
                assert_eq!(workload, "w0");
                assert_eq!(point, "a/t=y/n=1");
            }
            other => panic!("expected incomplete error, got {other:?}"),
        }
    }

    #[test]
    fn csv_error_paths() {
        let s = small_space();
        let text = csv_of(&s);
        let header = "workload,provider,config,nodes,runtime_s,cost_usd\n";
        let zero = format!("{header}w0,a,t=x,1,0,0.1\n");
        assert!(matches!(ObjectiveTable::read_csv(&s, zero.as_bytes()), Err(Error::Value(_))));
        let bad_point = format!("{header}w0,a,t=q,1,1,0.1\n");
        assert!(matches!(ObjectiveTable::read_csv(&s, bad_point.as_bytes()), Err(Error::Domain(_))));
        let bad_nodes = format!("{header}w0,a,t=x,3,1,0.1\n");
        assert!(matches!(ObjectiveTable::read_csv(&s, bad_nodes.as_bytes()), Err(Error::Domain(_))));
        let bad_col = "job,provider,config,nodes,runtime_s,cost_usd\nw0,a,t=x,1,1,1\n";
        assert!(matches!(ObjectiveTable::read_csv(&s, bad_col.as_bytes()), Err(Error::Parse(_))));
        let extra = "workload,provider,config,nodes,runtime_s,cost_usd,region\n";
        assert!(matches!(ObjectiveTable::read_csv(&s, extra.as_bytes()), Err(Error::Parse(_))));
        let second_row = text.lines().nth(1).unwrap();
        let dup = format!("{text}{second_row}\n");
        assert!(matches!(ObjectiveTable::read_csv(&s, dup.as_bytes()), Err(Error::Duplicate { .. })));
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let s = SearchSpace::reference();
        assert_eq!(csv_of(&s), csv_of(&s));
        let (a, _) = generate_synthetic(&s, 2, 1, Scenario::Neutral).unwrap();
        let (b, _) = generate_synthetic(&s, 2, 2, Scenario::Neutral).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn scenario_parsing_and_validation() {
        assert_eq!("neutral".parse::<Scenario>().unwrap(), Scenario::Neutral);
        assert_eq!("ernest_exact".parse::<Scenario>().unwrap(), Scenario::ErnestExact);
        assert_eq!(
            "dominant:1:0.1".parse::<Scenario>().unwrap(),
            Scenario::Dominant { provider: 1, factor: 0.1 }
        );
        assert!("dominant:x:0.1".parse::<Scenario>().is_err());
        assert!("spiky".parse::<Scenario>().is_err());
        let s = SearchSpace::reference();
        let bad = Scenario::Dominant { provider: 5, factor: 0.1 };
        assert!(generate_synthetic(&s, 1, 0, bad).is_err());
        let bad = Scenario::Dominant { provider: 1, factor: 0.0 };
        assert!(generate_synthetic(&s, 1, 0, bad).is_err());
        assert!(generate_synthetic(&s, 0, 0, Scenario::Neutral).is_err());
    }

    #[test]
    fn dominant_provider_beats_every_other_value() {
        let s = SearchSpace::reference();
        for seed in 0..20 {
            let scenario = Scenario::Dominant { provider: 1, factor: 0.1 };
            let (t, _) = generate_synthetic(&s, 5, seed, scenario).unwrap();
            let inside = s.provider_range(1).unwrap();
            for w in 0..5 {
                let vals = t.values(w, Target::Time);
                let others_min = vals
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !inside.contains(i))
                    .map(|(_, v)| *v)
                    .fold(f64::INFINITY, f64::min);
                assert!(vals[inside.clone()].iter().all(|&v| v < others_min), "seed {seed} w {w}");
            }
        }
    }

    #[test]
    fn ernest_exact_fits_the_four_term_law() {
        // Needs at least four distinct node counts for the fit to be determined.
        let s = SearchSpace::new(SearchSpace::reference().providers().to_vec(), vec![2, 3, 4, 5, 6, 8]).unwrap();
        let (t, _) = generate_synthetic(&s, 3, 11, Scenario::ErnestExact).unwrap();
        let nn = s.node_counts().len();
        let design = DMatrix::from_fn(nn, 4, |r, c| ernest_features(f64::from(s.node_counts()[r]))[c]);
        for w in 0..3 {
            for block in t.values(w, Target::Time).chunks(nn) {
                let y = DVector::from_column_slice(block);
                let coef = design.clone().svd(true, true).solve(&y, 1e-14).unwrap();
                let resid = (&design * coef - &y).norm() / y.norm();
                assert!(resid < 1e-9, "relative residual {resid}");
            }
        }
    }

    #[test]
    fn generated_costs_follow_price_list() {
        let s = SearchSpace::reference();
        let (t, prices) = generate_synthetic(&s, 2, 5, Scenario::Neutral).unwrap();
        for (i, p) in s.enumerate_all().iter().enumerate() {
            let r = t.value_at(1, i, Target::Time);
            let c = derive_cost(r, prices.price(&s, p).unwrap(), p.nodes).unwrap();
            assert_eq!(c, t.value_at(1, i, Target::Cost));
        }
        let mut buf = Vec::new();
        prices.write_csv(&s, &mut buf).unwrap();
        assert_eq!(PriceList::read_csv(&s, buf.as_slice()).unwrap(), prices);
    }

    proptest::proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(seed in 0u64..1000, n in 1usize..4) {
            let s = SearchSpace::reference();
            let (t, _) = generate_synthetic(&s, n, seed, Scenario::Neutral).unwrap();
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            let back = ObjectiveTable::read_csv(&s, buf.as_slice()).unwrap();
            proptest::prop_assert_eq!(back, t);
        }
    }
}
