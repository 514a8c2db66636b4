//! Outcome predictors.
//!
//! The search only ever calls [`Classifier::score`] and
//! [`Classifier::score_batch`]; no parameters or gradients are inspected.
//! Scores above 0.5 predict the positive class and a score of exactly 0.5
//! predicts the negative one.

mod external;
mod linear;

use std::time::Duration;

use thiserror::Error;

use crate::log::{LogError, Trace};
use crate::ltl::{evaluate, Activity, Alphabet, Formula, LtlError};

pub use external::{ExternalClassifier, DEFAULT_TIMEOUT};
pub use linear::{
    loss_and_gradient, majority_rate, train_linear, Hyper, TrainedModel, TrainingReport,
    SPLIT_FRACTIONS,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("classifier expects traces of length {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("activity #{0} is not part of the classifier's alphabet")]
    AlphabetMismatch(usize),
    #[error("training split contains a single class")]
    SingleClass,
    #[error("no trace has at least {0} events")]
    NoTraces(usize),
    #[error("failed to start predictor `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("predictor protocol violation: {0}")]
    Protocol(String),
    #[error("predictor did not answer within {0:?}")]
    Timeout(Duration),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
}

/// Label for a probability of the positive class.
#[inline]
pub fn label_of(score: f64) -> bool {
    score > 0.5
}

pub trait Classifier: Send + Sync {
    /// Fixed input length, when the classifier has one.
    fn prefix_length(&self) -> Option<usize>;

    fn score(&self, trace: &Trace) -> Result<f64, ModelError>;

    fn score_batch(&self, traces: &[Trace]) -> Result<Vec<f64>, ModelError> {
        traces.iter().map(|t| self.score(t)).collect()
    }

    fn predict(&self, trace: &Trace) -> Result<bool, ModelError> {
        self.score(trace).map(label_of)
    }
}

pub(crate) fn check_length(expected: Option<usize>, trace: &Trace) -> Result<(), ModelError> {
    match expected {
        Some(n) if n != trace.len() => Err(ModelError::LengthMismatch {
            expected: n,
            found: trace.len(),
        }),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Contains(Activity),
    Satisfies(Formula),
}

/// Deterministic classifier with scores in {0, 1}.
#[derive(Debug, Clone)]
pub struct RuleClassifier {
    alphabet: Alphabet,
    rule: Rule,
    prefix_length: Option<usize>,
}

impl RuleClassifier {
    pub fn contains(alphabet: &Alphabet, activity: &str) -> Result<Self, ModelError> {
        let a = alphabet
            .get(activity)
            .ok_or_else(|| LogError::UnknownActivity(activity.to_string()))?;
        Ok(RuleClassifier {
            alphabet: alphabet.clone(),
            rule: Rule::Contains(a),
            prefix_length: None,
        })
    }

    pub fn formula(alphabet: &Alphabet, formula: Formula) -> Result<Self, ModelError> {
        formula.check_alphabet(alphabet)?;
        Ok(RuleClassifier {
            alphabet: alphabet.clone(),
            rule: Rule::Satisfies(formula),
            prefix_length: None,
        })
    }

    pub fn with_prefix_length(mut self, n: usize) -> Self {
        self.prefix_length = Some(n);
        self
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }
}

impl Classifier for RuleClassifier {
    fn prefix_length(&self) -> Option<usize> {
        self.prefix_length
    }

    fn score(&self, trace: &Trace) -> Result<f64, ModelError> {
        check_length(self.prefix_length, trace)?;
        if let Some(a) = trace.iter().find(|&a| !self.alphabet.contains(a)) {
            return Err(ModelError::AlphabetMismatch(a.index()));
        }
        let hit = match &self.rule {
            Rule::Contains(a) => trace.iter().any(|b| b == *a),
            Rule::Satisfies(f) => evaluate(trace, f, &self.alphabet)?,
        };
        Ok(if hit { 1.0 } else { 0.0 })
    }
}
