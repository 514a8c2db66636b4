//! Genetic search for counterfactual traces.
//!
//! Five strategies share one generational loop and differ in their operators
//! and in what they may return:
//!
//! | strategy | crossover   | mutation             | returns           |
//! |----------|-------------|----------------------|-------------------|
//! | Gen      | uniform     | any `D_i` activity   | valid             |
//! | GenPhi   | uniform     | any `D_i` activity   | valid             |
//! | MAR      | uniform     | resample until `A_φ` | valid, compliant  |
//! | APriori  | constrained | unmentioned only     | valid, compliant  |
//! | Online   | constrained | run-preserving       | valid, compliant  |
//!
//! Gen ignores compliance in the fitness; the others weigh it with `δ`.

mod operators;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{compile, AutomataError, Dfa};
use crate::log::{Domains, EventLog, LogError, Trace};
use crate::ltl::{signature, Alphabet, Formula, FormulaSignature};
use crate::metrics::{
    distance, CandidateMetrics, FitnessWeights, MetricsError, MetricsReport, ReferenceSet,
};
use crate::model::{label_of, Classifier, ModelError};

pub use operators::{
    apriori_pool, constrained_crossover, mutate, mutate_and_retry, random_trace,
    standard_crossover, Mutation, RetryOutcome,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("traces differ in length (expected {expected}, found {found})")]
    LengthMismatch { expected: usize, found: usize },
    #[error("the query violates the background formula")]
    QueryViolatesFormula,
    #[error("the query is already predicted as the desired label")]
    AlreadyDesired,
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Log(#[from] LogError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    Gen,
    GenPhi,
    #[serde(rename = "MAR")]
    Mar,
    APriori,
    Online,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Gen,
        Strategy::GenPhi,
        Strategy::Mar,
        Strategy::APriori,
        Strategy::Online,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Gen => "Gen",
            Strategy::GenPhi => "GenPhi",
            Strategy::Mar => "MAR",
            Strategy::APriori => "APriori",
            Strategy::Online => "Online",
        }
    }

    /// Strategies whose results must satisfy the formula.
    pub fn is_constrained(self) -> bool {
        matches!(self, Strategy::Mar | Strategy::APriori | Strategy::Online)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "gen" => Ok(Strategy::Gen),
            "genphi" => Ok(Strategy::GenPhi),
            "mar" => Ok(Strategy::Mar),
            "apriori" => Ok(Strategy::APriori),
            "online" => Ok(Strategy::Online),
            _ => Err(EngineError::UnknownStrategy(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub p_c: f64,
    pub p_mut: f64,
    pub selection_fraction: f64,
    /// Generations without improvement of the best fitness before stopping.
    pub patience: usize,
    /// Smallest decrease of the best fitness that counts as improvement.
    pub epsilon: f64,
    pub seed: u64,
    pub t: usize,
    pub weights: FitnessWeights,
    pub strategy: Strategy,
    pub mar_max_retries: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            generations: 100,
            p_c: 0.5,
            p_mut: 0.2,
            selection_fraction: 0.5,
            patience: 20,
            epsilon: 1e-9,
            seed: 0,
            t: 5,
            weights: FitnessWeights::default(),
            strategy: Strategy::APriori,
            mar_max_retries: 100,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.p_c) || !(0.0..=1.0).contains(&self.p_mut) {
            return bad("p_c and p_mut must lie in [0, 1]");
        }
        if !(self.selection_fraction > 0.0 && self.selection_fraction <= 1.0) {
            return bad("selection_fraction must lie in (0, 1]");
        }
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if self.t < 1 {
            return bad("t must be at least 1");
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return bad("epsilon must be nonnegative");
        }
        self.weights
            .validate()
            .map_err(|e| EngineError::InvalidConfig(e.to_string()))
    }

    /// Weights actually used: Gen drops the compliance term.
    pub fn effective_weights(&self) -> FitnessWeights {
        match self.strategy {
            Strategy::Gen => FitnessWeights {
                delta: 0.0,
                ..self.weights
            },
            _ => self.weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub chromosome: Trace,
    pub score: f64,
    pub metrics: CandidateMetrics,
    pub fitness: f64,
}

impl Individual {
    fn rank_key(&self, other: &Individual) -> std::cmp::Ordering {
        self.fitness
            .total_cmp(&other.fitness)
            .then(self.metrics.sparsity.cmp(&other.metrics.sparsity))
            .then_with(|| self.chromosome.cmp(&other.chromosome))
    }
}

/// Keeps the `⌈fraction · len⌉` fittest individuals, ordered best first.
/// Ties go to the sparser, then the lexicographically smaller chromosome.
pub fn select(mut population: Vec<Individual>, fraction: f64) -> Vec<Individual> {
    population.sort_by(|a, b| a.rank_key(b));
    let keep =
        ((fraction * population.len() as f64).ceil() as usize).clamp(1, population.len().max(1));
    population.truncate(keep);
    population
}

/// Counters describing one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub generations: usize,
    pub evaluations: usize,
    pub seeded_from_log: usize,
    pub random_fills: usize,
    pub mar_rejections: usize,
    pub mar_exhausted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualSet {
    pub query: Trace,
    pub desired_label: bool,
    pub strategy: Strategy,
    pub config: GaConfig,
    pub candidates: Vec<Individual>,
    pub report: MetricsReport,
    pub stats: RunStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateDocument {
    pub trace: Vec<String>,
    pub score: f64,
    pub fitness: f64,
    pub metrics: CandidateMetrics,
}

/// JSON form of a [`CounterfactualSet`], with activities by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualDocument {
    pub query: Vec<String>,
    pub desired_label: bool,
    pub strategy: Strategy,
    pub config: GaConfig,
    pub candidates: Vec<CandidateDocument>,
    pub report: MetricsReport,
    pub stats: RunStats,
}

impl CounterfactualSet {
    pub fn traces(&self) -> Vec<Trace> {
        self.candidates
            .iter()
            .map(|c| c.chromosome.clone())
            .collect()
    }

    /// Serializable form. Wall-clock time is left out unless `with_runtime`,
    /// so that seeded runs produce identical documents.
    pub fn document(&self, alphabet: &Alphabet, with_runtime: bool) -> CounterfactualDocument {
        let names = |t: &Trace| t.names(alphabet).into_iter().map(String::from).collect();
        let mut report = self.report.clone();
        if !with_runtime {
            report.runtime_seconds = None;
        }
        CounterfactualDocument {
            query: names(&self.query),
            desired_label: self.desired_label,
            strategy: self.strategy,
            config: self.config,
            candidates: self
                .candidates
                .iter()
                .map(|c| CandidateDocument {
                    trace: names(&c.chromosome),
                    score: c.score,
                    fitness: c.fitness,
                    metrics: c.metrics,
                })
                .collect(),
            report,
            stats: self.stats.clone(),
        }
    }
}

/// Everything that depends on the formula, the reference log and the prefix
/// length but not on the query. Reusable across queries and strategies.
#[derive(Debug, Clone)]
pub struct SearchSpace {
    pub formula: Formula,
    pub dfa: Dfa,
    pub signature: FormulaSignature,
    pub references: ReferenceSet,
    pub domains: Domains,
}

impl SearchSpace {
    pub fn new(
        formula: &Formula,
        reference: &EventLog,
        length: usize,
    ) -> Result<Self, EngineError> {
        let dfa = compile(formula, &reference.alphabet)?;
        let references = ReferenceSet::new(reference, length);
        if references.prefixes().is_empty() {
            return Err(MetricsError::NoComparableTrace(length).into());
        }
        Ok(SearchSpace {
            formula: formula.clone(),
            signature: signature(formula, &reference.alphabet),
            dfa,
            references,
            domains: reference.domains(length)?,
        })
    }

    pub fn length(&self) -> usize {
        self.references.length()
    }
}

/// Reference prefixes predicted as `desired`, closest to the query first,
/// topped up with random traces drawn from the position domains.
pub fn initialize_population<R: Rng + ?Sized>(
    query: &Trace,
    desired: bool,
    references: &ReferenceSet,
    classifier: &dyn Classifier,
    domains: &Domains,
    size: usize,
    rng: &mut R,
) -> Result<(Vec<Trace>, usize), EngineError> {
    let prefixes: Vec<&Trace> = references
        .prefixes()
        .iter()
        .filter(|p| p.len() == query.len())
        .collect();
    let owned: Vec<Trace> = prefixes.iter().map(|p| (*p).clone()).collect();
    let scores = classifier.score_batch(&owned)?;
    let mut close: Vec<(f64, &Trace)> = Vec::new();
    for (p, s) in owned.iter().zip(scores) {
        if label_of(s) == desired {
            close.push((distance(query, p)?, p));
        }
    }
    close.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut out: Vec<Trace> = close
        .into_iter()
        .take(size)
        .map(|(_, p)| p.clone())
        .collect();
    let seeded = out.len();
    while out.len() < size {
        out.push(random_trace(domains, query.len(), rng));
    }
    Ok((out, seeded))
}

struct Evaluator<'a> {
    query: &'a Trace,
    desired: bool,
    classifier: &'a dyn Classifier,
    space: &'a SearchSpace,
    weights: FitnessWeights,
    cache: HashMap<Trace, Individual>,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, traces: Vec<Trace>) -> Result<Vec<Individual>, EngineError> {
        let mut fresh: Vec<Trace> = traces
            .iter()
            .filter(|t| !self.cache.contains_key(*t))
            .cloned()
            .collect();
        fresh.sort();
        fresh.dedup();
        if !fresh.is_empty() {
            let scores = self.classifier.score_batch(&fresh)?;
            for (t, score) in fresh.into_iter().zip(scores) {
                let metrics = CandidateMetrics::measure(
                    &t,
                    score,
                    self.query,
                    self.desired,
                    &self.space.references,
                    &self.space.dfa,
                )?;
                let ind = Individual {
                    chromosome: t.clone(),
                    score,
                    metrics,
                    fitness: metrics.fitness(&self.weights),
                };
                self.cache.insert(t, ind);
            }
        }
        Ok(traces.iter().map(|t| self.cache[t].clone()).collect())
    }
}

/// Runs the search for one query.
pub fn generate(
    query: &Trace,
    desired: bool,
    formula: &Formula,
    log: &EventLog,
    classifier: &dyn Classifier,
    config: &GaConfig,
) -> Result<CounterfactualSet, EngineError> {
    let space = SearchSpace::new(formula, log, query.len())?;
    generate_in(&space, query, desired, classifier, config)
}

/// [`generate`] with a precomputed search space.
pub fn generate_in(
    space: &SearchSpace,
    query: &Trace,
    desired: bool,
    classifier: &dyn Classifier,
    config: &GaConfig,
) -> Result<CounterfactualSet, EngineError> {
    let started = Instant::now();
    config.validate()?;
    let n = query.len();
    if n != space.length() {
        return Err(EngineError::LengthMismatch {
            expected: space.length(),
            found: n,
        });
    }
    if let Some(m) = classifier.prefix_length() {
        if m != n {
            return Err(ModelError::LengthMismatch {
                expected: m,
                found: n,
            }
            .into());
        }
    }
    if config.strategy.is_constrained() && !space.dfa.accepts(query)? {
        return Err(EngineError::QueryViolatesFormula);
    }
    if classifier.predict(query)? == desired {
        return Err(EngineError::AlreadyDesired);
    }
    let mut t = config.t;
    if t > config.population_size {
        log::warn!(
            "t = {t} exceeds the population size; returning at most {}",
            config.population_size
        );
        t = config.population_size;
    }

    let strategy = config.strategy;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut stats = RunStats::default();
    let mut eval = Evaluator {
        query,
        desired,
        classifier,
        space,
        weights: config.effective_weights(),
        cache: HashMap::new(),
    };

    let (initial, seeded) = initialize_population(
        query,
        desired,
        &space.references,
        classifier,
        &space.domains,
        config.population_size,
        &mut rng,
    )?;
    stats.seeded_from_log = seeded;
    stats.random_fills = initial.len() - seeded;
    let mut population = eval.evaluate(initial)?;
    let mut best = population
        .iter()
        .map(|i| i.fitness)
        .fold(f64::INFINITY, f64::min);
    let mut stale = 0;

    for _ in 0..config.generations {
        stats.generations += 1;
        let survivors = select(population, config.selection_fraction);
        let needed = config.population_size - survivors.len();
        let mut children = Vec::with_capacity(needed);
        for _ in 0..needed {
            let p1 = &survivors[rng.gen_range(0..survivors.len())].chromosome;
            let p2 = &survivors[rng.gen_range(0..survivors.len())].chromosome;
            let child = match strategy {
                Strategy::APriori | Strategy::Online => {
                    constrained_crossover(p1, p2, query, &space.signature, config.p_c, &mut rng)?
                }
                _ => standard_crossover(p1, p2, config.p_c, &mut rng)?,
            };
            let child = match strategy {
                Strategy::Gen | Strategy::GenPhi => mutate(
                    &child,
                    Mutation::Standard,
                    &space.domains,
                    config.p_mut,
                    &mut rng,
                )?,
                Strategy::APriori => mutate(
                    &child,
                    Mutation::APriori(&space.signature),
                    &space.domains,
                    config.p_mut,
                    &mut rng,
                )?,
                Strategy::Online => mutate(
                    &child,
                    Mutation::Online(&space.dfa),
                    &space.domains,
                    config.p_mut,
                    &mut rng,
                )?,
                Strategy::Mar => {
                    let r = mutate_and_retry(
                        &child,
                        &space.dfa,
                        &space.domains,
                        config.p_mut,
                        &mut rng,
                        config.mar_max_retries,
                    )?;
                    stats.mar_rejections += r.rejected;
                    stats.mar_exhausted += usize::from(r.exhausted);
                    r.trace
                }
            };
            children.push(child);
        }
        let children = eval.evaluate(children)?;
        population = survivors;
        population.extend(children);

        let current = population
            .iter()
            .map(|i| i.fitness)
            .fold(f64::INFINITY, f64::min);
        if best - current > config.epsilon {
            best = current;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    stats.evaluations = eval.cache.len();

    // Every chromosome evaluated during the run is eligible.
    let mut archive: Vec<Individual> = eval
        .cache
        .into_values()
        .filter(|i| i.metrics.validity == 0)
        .filter(|i| !strategy.is_constrained() || i.metrics.compliance == 1)
        .collect();
    archive.sort_by(|a, b| a.rank_key(b));
    archive.truncate(t);

    let traces: Vec<Trace> = archive.iter().map(|i| i.chromosome.clone()).collect();
    let metrics = archive.iter().map(|i| i.metrics).collect();
    let report = MetricsReport::new(
        &traces,
        metrics,
        config.t,
        Some(started.elapsed().as_secs_f64()),
    )?;
    log::debug!(
        "{strategy}: {} candidates after {} generations, {} evaluations",
        archive.len(),
        stats.generations,
        stats.evaluations
    );
    Ok(CounterfactualSet {
        query: query.clone(),
        desired_label: desired,
        strategy,
        config: *config,
        candidates: archive,
        report,
        stats,
    })
}
