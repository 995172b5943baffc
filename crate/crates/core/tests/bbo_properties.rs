use mcopt::bbo::{run_bbo, BboKind, CandidateSet};
use mcopt::dataset::generate_synthetic;
use mcopt::{ConfigPoint, Result, Scenario, SearchSpace, Target};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn space() -> SearchSpace {
    SearchSpace::reference()
}

fn values_objective(space: &SearchSpace, values: Vec<f64>) -> impl FnMut(&ConfigPoint) -> Result<f64> + '_ {
    move |p| Ok(values[space.index_of(p)?])
}

fn rs_counts(space: &SearchSpace, k: usize, draws: usize, seed: u64) -> Vec<usize> {
    let cands = CandidateSet::for_provider(space, k).unwrap();
    let offset = space.provider_range(k).unwrap().start;
    let mut counts = vec![0usize; cands.len()];
    let trace = run_bbo(BboKind::RandomSearch, cands, |_: &ConfigPoint| Ok(1.0), draws, seed).unwrap();
    assert_eq!(trace.len(), draws);
    for e in trace.entries() {
        counts[space.index_of(&e.point).unwrap() - offset] += 1;
    }
    counts
}

fn chi2_999(dof: f64) -> f64 {
    ChiSquared::new(dof).unwrap().inverse_cdf(0.999)
}

#[test]
fn random_search_frequencies_near_uniform() {
    let space = space();
    for k in 0..space.n_providers() {
        let c = space.provider_len(k).unwrap();
        // Goodness of fit at 10 draws per candidate.
        let counts = rs_counts(&space, k, 10 * c, 2024);
        let expected = 10.0;
        let chi2: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < chi2_999((c - 1) as f64), "provider {k}: chi2 {chi2}");
        // Per-candidate band at 100 draws per candidate.
        let n = 100 * c;
        for (i, &cnt) in rs_counts(&space, k, n, 2025).iter().enumerate() {
            let freq = cnt as f64 / n as f64;
            assert!(
                freq >= 0.5 / c as f64 && freq <= 2.0 / c as f64,
                "provider {k} candidate {i}: {cnt} of {n}"
            );
        }
    }
}

#[test]
fn cherrypick_finds_planted_optimum() {
    // Smooth background over the encoding, with one candidate planted 100x
    // below everything else.
    let space = space();
    let k = 2;
    let range = space.provider_range(k).unwrap();
    let c = range.len();
    let points = space.enumerate_all();
    let enc: Vec<Vec<f64>> = points.iter().map(|p| space.encode_flat(p).unwrap().0).collect();
    let mut hits = 0;
    for seed in 0..50u64 {
        let planted = range.start + (seed as usize * 7) % c;
        let mut values: Vec<f64> = enc
            .iter()
            .map(|e| 1.0 + e.iter().zip(&enc[planted]).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .collect();
        let floor = values
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != planted)
            .map(|(_, &v)| v)
            .fold(f64::INFINITY, f64::min);
        values[planted] = floor / 100.0;
        let cands = CandidateSet::for_provider(&space, k).unwrap();
        let trace = run_bbo(BboKind::CherryPickBo, cands, values_objective(&space, values), c / 2, seed).unwrap();
        if trace.entries().iter().any(|e| space.index_of(&e.point).unwrap() == planted) {
            hits += 1;
        }
    }
    assert!(hits >= 45, "found planted point in {hits} of 50 seeds");
}

#[test]
fn traces_are_reproducible_byte_for_byte() {
    let space = space();
    let (table, _) = generate_synthetic(&space, 1, 4, Scenario::Neutral).unwrap();
    for kind in BboKind::ALL {
        let run = || {
            let cands = CandidateSet::flattened(&space).unwrap();
            let t = run_bbo(kind, cands, |p: &ConfigPoint| table.lookup_index(0, p, Target::Time), 20, 99).unwrap();
            let mut buf = Vec::new();
            t.write_csv(&space, &mut buf).unwrap();
            buf
        };
        assert_eq!(run(), run(), "{kind}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_invariants(kind_idx in 0usize..6, seed in any::<u64>(), budget in 1usize..40, table_seed in 0u64..20) {
        let kind = BboKind::ALL[kind_idx];
        let space = space();
        let (table, _) = generate_synthetic(&space, 1, table_seed, Scenario::Neutral).unwrap();
        let cands = CandidateSet::for_provider(&space, 1).unwrap();
        let size = cands.len();
        let trace = run_bbo(kind, cands, |p: &ConfigPoint| table.lookup_index(0, p, Target::Cost), budget, seed).unwrap();

        let expected = if kind == BboKind::RandomSearch { budget } else { budget.min(size) };
        prop_assert_eq!(trace.len(), expected);

        let mut best = f64::INFINITY;
        let mut expense = 0.0;
        for (i, e) in trace.entries().iter().enumerate() {
            prop_assert_eq!(e.step, i + 1);
            prop_assert_eq!(e.value, table.lookup_index(0, &e.point, Target::Cost).unwrap());
            best = best.min(e.value);
            expense += e.value;
            prop_assert_eq!(e.best_value, best);
            prop_assert!((e.cum_expense - expense).abs() <= 1e-12 * expense);
        }
        if kind != BboKind::RandomSearch {
            let mut seen: Vec<&ConfigPoint> = trace.entries().iter().map(|e| &e.point).collect();
            seen.sort();
            seen.dedup();
            prop_assert_eq!(seen.len(), trace.len());
        }
    }
}
