//! Experiment grid: strategies × formulas × prefix lengths, each cell
//! averaged over the same sampled queries.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use tempocf_core::engine::{generate_in, EngineError, GaConfig, SearchSpace, Strategy};
use tempocf_core::log::{EventLog, Trace};
use tempocf_core::ltl::{signature, Formula};
use tempocf_core::metrics::MetricsReport;
use tempocf_core::model::{
    train_linear, Classifier, Hyper, ModelError, TrainedModel, SPLIT_FRACTIONS,
};

#[derive(Debug, Clone)]
pub struct BenchFormula {
    pub id: String,
    pub formula: Formula,
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub strategies: Vec<Strategy>,
    pub formulas: Vec<BenchFormula>,
    pub prefixes: Vec<usize>,
    pub queries: usize,
    pub seed: u64,
    pub ga: GaConfig,
    pub hyper: Hyper,
    pub timing: bool,
}

/// One CSV row. Means over candidates pool every candidate of every query;
/// diversity, hit rate and runtime are averaged over queries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRow {
    pub strategy: Strategy,
    pub formula_id: String,
    pub coverage: f64,
    pub prefix: usize,
    pub distance: Option<f64>,
    pub sparsity: Option<f64>,
    pub implausibility: Option<f64>,
    pub diversity: Option<f64>,
    pub compliance: Option<f64>,
    pub hit_rate: Option<f64>,
    pub runtime_seconds: Option<f64>,
    pub queries: usize,
    pub failures: usize,
}

/// Per-query outcome, kept for diagnostics and the acceptance checks.
#[derive(Debug, Clone)]
pub struct QueryRun {
    pub query: Trace,
    pub desired: bool,
    pub result: Result<MetricsReport, String>,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub row: CellRow,
    pub runs: Vec<QueryRun>,
}

/// Derives an independent seed for task `index` of a run seeded by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// The chronological test split, as in training.
pub fn test_split(log: &EventLog) -> EventLog {
    log.split(&SPLIT_FRACTIONS)
        .pop()
        .expect("split yields a test part")
}

/// The training split, which serves as the reference population.
pub fn reference_split(log: &EventLog) -> EventLog {
    log.split(&SPLIT_FRACTIONS).swap_remove(0)
}

/// Samples up to `count` test prefixes of length `n` that satisfy the formula,
/// uniformly without replacement. The desired label is the opposite of the
/// prediction.
pub fn sample_queries(
    test: &EventLog,
    space: &SearchSpace,
    classifier: &dyn Classifier,
    count: usize,
    seed: u64,
) -> Result<Vec<(Trace, bool)>, ModelError> {
    let n = space.length();
    let mut pool: Vec<Trace> = test
        .traces()
        .filter_map(|t| t.prefix(n))
        .filter(|p| space.dfa.accepts(p).unwrap_or(false))
        .collect();
    pool.sort();
    pool.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(count);
    pool.sort();
    let scores = classifier.score_batch(&pool)?;
    Ok(pool
        .into_iter()
        .zip(scores)
        .map(|(t, s)| (t, !tempocf_core::model::label_of(s)))
        .collect())
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn summarize(
    strategy: Strategy,
    entry: &BenchFormula,
    coverage: f64,
    prefix: usize,
    runs: &[QueryRun],
    timing: bool,
) -> CellRow {
    let ok: Vec<&MetricsReport> = runs.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    let pooled = |f: fn(&tempocf_core::metrics::CandidateMetrics) -> f64| {
        mean(ok.iter().flat_map(|r| r.candidates.iter().map(f)))
    };
    CellRow {
        strategy,
        formula_id: entry.id.clone(),
        coverage,
        prefix,
        distance: pooled(|m| m.distance),
        sparsity: pooled(|m| m.sparsity as f64),
        implausibility: pooled(|m| m.implausibility),
        diversity: mean(ok.iter().map(|r| r.diversity)),
        compliance: pooled(|m| f64::from(m.compliance)),
        hit_rate: mean(ok.iter().map(|r| r.hit_rate)),
        runtime_seconds: if timing {
            mean(ok.iter().filter_map(|r| r.runtime_seconds))
        } else {
            None
        },
        queries: runs.len(),
        failures: runs.len() - ok.len(),
    }
}

/// Runs the whole grid. Per-query failures are recorded in the cells and do
/// not abort the run; failures to train or to build a search space do.
pub fn run_bench(log: &EventLog, plan: &BenchPlan) -> Result<Vec<Cell>, BenchError> {
    let reference = reference_split(log);
    let test = test_split(log);
    let mut cells = Vec::new();
    for &n in &plan.prefixes {
        let started = Instant::now();
        let model: TrainedModel = train_linear(log, n, &plan.hyper)?;
        log::info!(
            "prefix {n}: trained in {:.2}s, test accuracy {:?}",
            started.elapsed().as_secs_f64(),
            model.report.as_ref().and_then(|r| r.test_accuracy)
        );
        for (fi, entry) in plan.formulas.iter().enumerate() {
            let space = SearchSpace::new(&entry.formula, &reference, n)?;
            let coverage = signature(&entry.formula, &log.alphabet).coverage();
            let query_seed = derive_seed(plan.seed, (n as u64) << 32 | fi as u64);
            let queries = sample_queries(&test, &space, &model, plan.queries, query_seed)?;
            if queries.len() < plan.queries {
                log::warn!(
                    "{}: only {} compliant test prefixes of length {n}",
                    entry.id,
                    queries.len()
                );
            }
            let tasks: Vec<(usize, Strategy, usize)> = plan
                .strategies
                .iter()
                .enumerate()
                .flat_map(|(si, &s)| (0..queries.len()).map(move |qi| (si, s, qi)))
                .collect();
            let cell_base = cells.len();
            let results: Vec<QueryRun> = tasks
                .par_iter()
                .map(|&(si, strategy, qi)| {
                    let (query, desired) = &queries[qi];
                    let config = GaConfig {
                        strategy,
                        seed: derive_seed(plan.seed, ((cell_base + si) as u64) << 32 | qi as u64),
                        ..plan.ga
                    };
                    let result = generate_in(&space, query, *desired, &model, &config)
                        .map(|set| set.report)
                        .map_err(|e| e.to_string());
                    QueryRun {
                        query: query.clone(),
                        desired: *desired,
                        result,
                    }
                })
                .collect();
            let mut results = results.into_iter();
            for &strategy in &plan.strategies {
                let runs: Vec<QueryRun> = results.by_ref().take(queries.len()).collect();
                let row = summarize(strategy, entry, coverage, n, &runs, plan.timing);
                cells.push(Cell { row, runs });
            }
        }
    }
    Ok(cells)
}

pub fn write_csv<W: std::io::Write>(cells: &[Cell], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for c in cells {
        w.serialize(&c.row)?;
    }
    w.flush()?;
    Ok(())
}
