//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain strings and numbers and returns a JSON string,
//! so the page needs no generated TypeScript types.

use mcopt::bbo::BboKind;
use mcopt::dataset::generate_synthetic;
use mcopt::experiment::{aggregate_regret, box_stats, expected_rs_regret, run_plan, savings, Algorithm, ExperimentPlan};
use mcopt::multicloud::cloudbandit;
use mcopt::{ConfigPoint, Error, ObjectiveTable, Result, Scenario, SearchSpace, Target};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn table(scenario: &str, workloads: usize, seed: u64) -> Result<ObjectiveTable> {
    let scenario: Scenario = scenario.parse()?;
    Ok(generate_synthetic(&SearchSpace::reference(), workloads, seed, scenario)?.0)
}

fn parse_list<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::parse).collect()
}

fn parse_budgets(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad budget `{x}`"))))
        .collect()
}

#[derive(Serialize)]
struct Step {
    step: usize,
    provider: String,
    config: String,
    value: f64,
    best: f64,
}

/// One CloudBandit run on a fresh single-workload table. Returns the
/// result document plus each arm's evaluations in order.
pub fn cloudbandit_json(scenario: &str, target: &str, optimizer: &str, b1: usize, eta: f64, seed: u64) -> Result<String> {
    let table = table(scenario, 1, seed)?;
    let space = table.space();
    let target: Target = target.parse()?;
    let kind: BboKind = optimizer.parse()?;
    let obj = |p: &ConfigPoint| table.lookup_index(0, p, target);
    let result = cloudbandit(space, obj, kind, b1, eta, seed)?;
    let mut doc = result.to_json(space)?;
    let mut steps = Vec::new();
    for trace in &result.traces {
        for e in trace.entries() {
            steps.push(Step {
                step: e.step,
                provider: space.provider(e.point.provider)?.name().to_string(),
                config: space.point_string(&e.point)?,
                value: e.value,
                best: e.best_value,
            });
        }
    }
    let (_, fstar) = mcopt::experiment::true_minimum(&table, 0, target)?;
    doc["steps"] = serde_json::to_value(steps)?;
    doc["fstar"] = json!(fstar);
    Ok(doc.to_string())
}

/// Mean and median regret per (algorithm, budget), plus the closed-form
/// expected regret of random search at each budget.
pub fn regret_curves_json(scenario: &str, target: &str, algorithms: &str, budgets: &str, seeds: usize, seed: u64) -> Result<String> {
    let table = table(scenario, 3, seed)?;
    let target: Target = target.parse()?;
    let budgets = parse_budgets(budgets)?;
    let plan = ExperimentPlan {
        algorithms: parse_list::<Algorithm>(algorithms)?,
        targets: vec![target],
        budgets: budgets.clone(),
        seeds,
        seed,
        ..ExperimentPlan::default()
    };
    let out = run_plan(&table, &plan, 1)?;
    let summaries = aggregate_regret(&out.regret)?;
    let mut oracle = Vec::with_capacity(budgets.len());
    for &b in &budgets {
        let mut sum = 0.0;
        for w in 0..table.workloads().len() {
            sum += expected_rs_regret(&table, w, target, b)?;
        }
        oracle.push(json!({ "budget": b, "regret": sum / table.workloads().len() as f64 }));
    }
    Ok(json!({ "summaries": summaries, "rs_expected": oracle }).to_string())
}

/// Median savings over workloads as a function of the number of
/// production runs N, for each algorithm at a fixed budget.
pub fn savings_curve_json(scenario: &str, target: &str, algorithms: &str, budget: usize, seeds: usize, n_max: usize, seed: u64) -> Result<String> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be positive".into()));
    }
    let table = table(scenario, 6, seed)?;
    let target: Target = target.parse()?;
    let algorithms = parse_list::<Algorithm>(algorithms)?;
    let plan = ExperimentPlan {
        algorithms: algorithms.clone(),
        targets: vec![target],
        budgets: vec![budget],
        seeds,
        seed,
        ..ExperimentPlan::default()
    };
    let out = run_plan(&table, &plan, 1)?;
    let mut series = Vec::new();
    for a in algorithms {
        let rows: Vec<_> = out.savings.iter().filter(|r| r.algorithm == a).collect();
        let mut points = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let s = rows.iter().map(|r| savings(r.c_opt, r.r_opt, r.r_rand, n)).collect::<Result<Vec<_>>>()?;
            points.push(json!({ "n": n, "median": box_stats(&s)?.median }));
        }
        series.push(json!({ "algorithm": a, "points": points }));
    }
    Ok(json!({ "budget": budget, "series": series }).to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = runCloudBandit)]
pub fn run_cloudbandit(scenario: &str, target: &str, optimizer: &str, b1: usize, eta: f64, seed: u32) -> std::result::Result<String, JsValue> {
    js(cloudbandit_json(scenario, target, optimizer, b1, eta, u64::from(seed)))
}

#[wasm_bindgen(js_name = regretCurves)]
pub fn regret_curves(scenario: &str, target: &str, algorithms: &str, budgets: &str, seeds: usize, seed: u32) -> std::result::Result<String, JsValue> {
    js(regret_curves_json(scenario, target, algorithms, budgets, seeds, u64::from(seed)))
}

#[wasm_bindgen(js_name = savingsCurve)]
pub fn savings_curve(scenario: &str, target: &str, algorithms: &str, budget: usize, seeds: usize, n_max: usize, seed: u32) -> std::result::Result<String, JsValue> {
    js(savings_curve_json(scenario, target, algorithms, budget, seeds, n_max, u64::from(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn cloudbandit_doc_has_steps() {
        let v: Value = serde_json::from_str(&cloudbandit_json("dominant:2:0.1", "cost", "rbfopt", 1, 2.0, 4).unwrap()).unwrap();
        assert_eq!(v["total_evals"], 11);
        assert_eq!(v["steps"].as_array().unwrap().len(), 11);
        assert_eq!(v["chosen_provider"], "gcp");
    }

    #[test]
    fn regret_curves_include_oracle() {
        let v: Value = serde_json::from_str(&regret_curves_json("neutral", "time", "rs,cb:rbfopt", "11,22", 3, 1).unwrap()).unwrap();
        assert_eq!(v["summaries"].as_array().unwrap().len(), 4);
        let rs = v["rs_expected"].as_array().unwrap();
        assert!(rs[0]["regret"].as_f64().unwrap() > rs[1]["regret"].as_f64().unwrap());
    }

    #[test]
    fn savings_curve_has_one_point_per_n() {
        let v: Value = serde_json::from_str(&savings_curve_json("neutral", "cost", "exhaustive", 33, 2, 10, 1).unwrap()).unwrap();
        let pts = v["series"][0]["points"].as_array().unwrap();
        assert_eq!(pts.len(), 10);
        assert!(pts.iter().all(|p| p["median"].as_f64().unwrap() < 0.0));
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(cloudbandit_json("sideways", "cost", "rbfopt", 1, 2.0, 0).is_err());
        assert!(regret_curves_json("neutral", "time", "rs", "x", 1, 0).is_err());
        assert!(savings_curve_json("neutral", "cost", "rs", 11, 1, 0, 0).is_err());
    }
}
