use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::log::{EventLog, Trace};
use crate::ltl::Alphabet;

use super::{check_length, Classifier, ModelError};

/// Chronological train / validation fractions; the test split takes the rest.
pub const SPLIT_FRACTIONS: [f64; 2] = [0.7, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyper {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            epochs: 40,
            learning_rate: 0.5,
            l2: 1e-3,
            batch_size: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub hyper: Hyper,
    pub train_cases: usize,
    pub validation_cases: usize,
    pub test_cases: usize,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
}

/// Logistic regression over one-hot `(position, activity)` features. Weight
/// `p·|Σ| + a` belongs to activity `a` at 0-based position `p`; the last
/// weight is the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub prefix_length: usize,
    pub alphabet: Alphabet,
    pub weights: Vec<f64>,
    pub report: Option<TrainingReport>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn linear_term(weights: &[f64], active: &[usize]) -> f64 {
    let bias = weights[weights.len() - 1];
    active.iter().map(|&j| weights[j]).sum::<f64>() + bias
}

/// Mean logistic loss plus `l2/2 · ‖w‖²` (bias excluded) and its gradient.
/// Each sample lists the indices of its active features; the bias feature is
/// implicit.
pub fn loss_and_gradient(
    weights: &[f64],
    samples: &[Vec<usize>],
    labels: &[bool],
    l2: f64,
) -> (f64, Vec<f64>) {
    let d = weights.len();
    let m = samples.len().max(1) as f64;
    let mut grad = vec![0.0; d];
    let mut loss = 0.0;
    for (x, &y) in samples.iter().zip(labels) {
        let z = linear_term(weights, x);
        let y = if y { 1.0 } else { 0.0 };
        loss += softplus(z) - y * z;
        let r = (sigmoid(z) - y) / m;
        for &j in x {
            grad[j] += r;
        }
        grad[d - 1] += r;
    }
    loss /= m;
    for j in 0..d - 1 {
        loss += 0.5 * l2 * weights[j] * weights[j];
        grad[j] += l2 * weights[j];
    }
    (loss, grad)
}

impl TrainedModel {
    /// Model with all weights zero, which scores every trace 0.5.
    pub fn untrained(alphabet: Alphabet, prefix_length: usize) -> Self {
        let d = prefix_length * alphabet.len() + 1;
        TrainedModel {
            prefix_length,
            alphabet,
            weights: vec![0.0; d],
            report: None,
        }
    }

    fn features(&self, trace: &Trace) -> Result<Vec<usize>, ModelError> {
        check_length(Some(self.prefix_length), trace)?;
        let k = self.alphabet.len();
        trace
            .iter()
            .enumerate()
            .map(|(p, a)| {
                if self.alphabet.contains(a) {
                    Ok(p * k + a.index())
                } else {
                    Err(ModelError::AlphabetMismatch(a.index()))
                }
            })
            .collect()
    }

    fn accuracy(&self, log: &EventLog) -> Result<Option<f64>, ModelError> {
        if log.is_empty() {
            return Ok(None);
        }
        let mut hits = 0;
        for case in &log.cases {
            hits += usize::from(self.predict(&case.trace)? == case.label);
        }
        Ok(Some(hits as f64 / log.len() as f64))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let model: TrainedModel = serde_json::from_str(&fs::read_to_string(path)?)?;
        let expected = model.prefix_length * model.alphabet.len() + 1;
        if model.weights.len() != expected {
            return Err(ModelError::Protocol(format!(
                "model has {} weights, expected {expected}",
                model.weights.len()
            )));
        }
        Ok(model)
    }
}

impl Classifier for TrainedModel {
    fn prefix_length(&self) -> Option<usize> {
        Some(self.prefix_length)
    }

    fn score(&self, trace: &Trace) -> Result<f64, ModelError> {
        let x = self.features(trace)?;
        Ok(sigmoid(linear_term(&self.weights, &x)))
    }
}

/// Fits a linear model on the `prefix_length` prefixes of `log` with seeded
/// minibatch gradient descent. The prefixed log is split chronologically
/// 70/10/20 into train, validation and test cases.
pub fn train_linear(
    log: &EventLog,
    prefix_length: usize,
    hyper: &Hyper,
) -> Result<TrainedModel, ModelError> {
    let prefixed = log.prefixes(prefix_length);
    if prefix_length == 0 || prefixed.is_empty() {
        return Err(ModelError::NoTraces(prefix_length));
    }
    let mut parts = prefixed.split(&SPLIT_FRACTIONS).into_iter();
    let (train, validation, test) = (
        parts.next().expect("train split"),
        parts.next().expect("validation split"),
        parts.next().expect("test split"),
    );
    let positives = train.cases.iter().filter(|c| c.label).count();
    if positives == 0 || positives == train.len() {
        return Err(ModelError::SingleClass);
    }

    let mut model = TrainedModel::untrained(log.alphabet.clone(), prefix_length);
    let samples = train
        .traces()
        .map(|t| model.features(t))
        .collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<bool> = train.cases.iter().map(|c| c.label).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let batch = hyper.batch_size.max(1);
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let xs: Vec<Vec<usize>> = chunk.iter().map(|&i| samples[i].clone()).collect();
            let ys: Vec<bool> = chunk.iter().map(|&i| labels[i]).collect();
            let (_, g) = loss_and_gradient(&model.weights, &xs, &ys, hyper.l2);
            for (w, g) in model.weights.iter_mut().zip(g) {
                *w -= hyper.learning_rate * g;
            }
        }
        if log::log_enabled!(log::Level::Debug) {
            let (loss, _) = loss_and_gradient(&model.weights, &samples, &labels, hyper.l2);
            log::debug!("epoch {epoch}: training loss {loss:.5}");
        }
    }

    let train_accuracy = model.accuracy(&train)?.unwrap_or(0.0);
    model.report = Some(TrainingReport {
        hyper: *hyper,
        train_cases: train.len(),
        validation_cases: validation.len(),
        test_cases: test.len(),
        train_accuracy,
        validation_accuracy: model.accuracy(&validation)?,
        test_accuracy: model.accuracy(&test)?,
    });
    Ok(model)
}

/// Share of the majority label, the accuracy of a constant predictor.
pub fn majority_rate(log: &EventLog) -> f64 {
    let p = log.positive_rate();
    p.max(1.0 - p)
}
