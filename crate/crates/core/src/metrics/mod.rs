//! Quality measures for counterfactual traces.
//!
//! Per candidate: validity, positional distance and sparsity to the query,
//! implausibility against a reference population, and compliance with the
//! background formula. Per set: diversity and hit rate. All comparisons are
//! positional, so candidates always share the query's length.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{AutomataError, Dfa};
use crate::log::{EventLog, Trace};
use crate::model::{label_of, Classifier, ModelError};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("traces differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("no reference trace has at least {0} events")]
    NoComparableTrace(usize),
    #[error("weights must be finite and nonnegative")]
    InvalidWeights,
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn same_length(a: &Trace, b: &Trace) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// 1 when the prediction misses the desired class.
pub fn validity(predicted: bool, desired: bool) -> u8 {
    u8::from(predicted != desired)
}

/// Number of positions where the traces differ.
pub fn sparsity(a: &Trace, b: &Trace) -> Result<usize, MetricsError> {
    same_length(a, b)?;
    Ok(a.iter().zip(b.iter()).filter(|(x, y)| x != y).count())
}

/// Share of positions where the traces differ.
pub fn distance(a: &Trace, b: &Trace) -> Result<f64, MetricsError> {
    Ok(sparsity(a, b)? as f64 / a.len() as f64)
}

/// Distance to the closest reference prefix of the candidate's length.
/// References shorter than the candidate are skipped.
pub fn implausibility(candidate: &Trace, population: &EventLog) -> Result<f64, MetricsError> {
    ReferenceSet::new(population, candidate.len()).implausibility(candidate)
}

/// Mean pairwise distance, 0 for fewer than two traces.
pub fn diversity(set: &[Trace]) -> Result<f64, MetricsError> {
    let c = set.len();
    if c < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (k, a) in set.iter().enumerate() {
        for b in &set[k + 1..] {
            total += distance(a, b)?;
        }
    }
    Ok(2.0 * total / (c * (c - 1)) as f64)
}

pub fn compliance(candidate: &Trace, dfa: &Dfa) -> Result<u8, MetricsError> {
    Ok(u8::from(dfa.accepts(candidate)?))
}

/// Distinct reference prefixes of one fixed length, for repeated
/// implausibility queries.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    length: usize,
    prefixes: Vec<Trace>,
}

impl ReferenceSet {
    pub fn new(population: &EventLog, length: usize) -> Self {
        let prefixes: BTreeSet<Trace> = population
            .traces()
            .filter_map(|t| t.prefix(length))
            .collect();
        ReferenceSet {
            length,
            prefixes: prefixes.into_iter().collect(),
        }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn prefixes(&self) -> &[Trace] {
        &self.prefixes
    }

    pub fn implausibility(&self, candidate: &Trace) -> Result<f64, MetricsError> {
        if candidate.len() != self.length {
            return Err(MetricsError::LengthMismatch {
                left: candidate.len(),
                right: self.length,
            });
        }
        let best = self
            .prefixes
            .iter()
            .map(|p| {
                p.iter()
                    .zip(candidate.iter())
                    .filter(|(x, y)| x != y)
                    .count()
            })
            .min()
            .ok_or(MetricsError::NoComparableTrace(self.length))?;
        Ok(best as f64 / self.length as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        FitnessWeights {
            alpha: 0.5,
            beta: 0.5,
            gamma: 0.5,
            delta: 0.5,
        }
    }
}

impl FitnessWeights {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let ok = [self.alpha, self.beta, self.gamma, self.delta]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(MetricsError::InvalidWeights)
        }
    }
}

/// The per-candidate quantities that enter the fitness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateMetrics {
    pub validity: u8,
    pub distance: f64,
    pub sparsity: usize,
    pub implausibility: f64,
    pub compliance: u8,
}

impl CandidateMetrics {
    /// `validity + α·distance + β·sparsity + γ·implausibility + δ·(1 − compliance)`;
    /// lower is better.
    pub fn fitness(&self, w: &FitnessWeights) -> f64 {
        f64::from(self.validity)
            + w.alpha * self.distance
            + w.beta * self.sparsity as f64
            + w.gamma * self.implausibility
            + w.delta * f64::from(1 - self.compliance)
    }

    /// Measures `candidate` given its classifier score.
    pub fn measure(
        candidate: &Trace,
        score: f64,
        query: &Trace,
        desired: bool,
        references: &ReferenceSet,
        dfa: &Dfa,
    ) -> Result<Self, MetricsError> {
        let sparsity = sparsity(candidate, query)?;
        Ok(CandidateMetrics {
            validity: validity(label_of(score), desired),
            distance: sparsity as f64 / query.len() as f64,
            sparsity,
            implausibility: references.implausibility(candidate)?,
            compliance: compliance(candidate, dfa)?,
        })
    }
}

/// Fitness of one candidate, querying the classifier directly.
pub fn fitness(
    candidate: &Trace,
    query: &Trace,
    desired: bool,
    classifier: &dyn Classifier,
    references: &ReferenceSet,
    dfa: &Dfa,
    weights: &FitnessWeights,
) -> Result<f64, MetricsError> {
    let score = classifier.score(candidate)?;
    let m = CandidateMetrics::measure(candidate, score, query, desired, references, dfa)?;
    Ok(m.fitness(weights))
}

/// Aggregate report over a counterfactual set. Means are `None` for an empty
/// set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub candidates: Vec<CandidateMetrics>,
    pub validity: Option<f64>,
    pub distance: Option<f64>,
    pub sparsity: Option<f64>,
    pub implausibility: Option<f64>,
    pub compliance: Option<f64>,
    pub diversity: f64,
    pub hit_rate: f64,
    pub runtime_seconds: Option<f64>,
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> Option<f64> {
    let n = values.len();
    (n > 0).then(|| values.sum::<f64>() / n as f64)
}

impl MetricsReport {
    pub fn new(
        traces: &[Trace],
        candidates: Vec<CandidateMetrics>,
        requested: usize,
        runtime_seconds: Option<f64>,
    ) -> Result<Self, MetricsError> {
        let c = &candidates;
        Ok(MetricsReport {
            validity: mean(c.iter().map(|m| f64::from(m.validity))),
            distance: mean(c.iter().map(|m| m.distance)),
            sparsity: mean(c.iter().map(|m| m.sparsity as f64)),
            implausibility: mean(c.iter().map(|m| m.implausibility)),
            compliance: mean(c.iter().map(|m| f64::from(m.compliance))),
            diversity: diversity(traces)?,
            hit_rate: if requested == 0 {
                0.0
            } else {
                traces.len() as f64 / requested as f64
            },
            runtime_seconds,
            candidates,
        })
    }
}
