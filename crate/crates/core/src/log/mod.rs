//! Event logs: labelled traces, fixed-length prefixes and per-position
//! activity domains.

mod csv_io;
mod generator;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{Activity, ActivitySet, Alphabet, LtlError};

pub use csv_io::{read_csv_log, write_csv_log, CsvOptions};
pub use generator::{claim_constraint, generate_claim_log, CLAIM_ACTIVITIES};
pub use trace::Trace;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("traces must contain at least one event")]
    EmptyTrace,
    #[error("unknown activity `{0}`")]
    UnknownActivity(String),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("case `{case}`: non-contiguous positions (expected {expected}, found {found})")]
    NonContiguousPositions {
        case: String,
        expected: usize,
        found: usize,
    },
    #[error("case `{case}`: duplicate position {position}")]
    DuplicatePosition { case: String, position: usize },
    #[error("empty case id at row {0}")]
    EmptyCase(usize),
    #[error("case `{0}`: conflicting labels")]
    ConflictingLabels(String),
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("duplicate case id `{0}`")]
    DuplicateCase(String),
    #[error("log contains no cases")]
    EmptyLog,
    #[error("no trace reaches position {0}")]
    UncoveredPosition(usize),
    #[error(transparent)]
    Alphabet(#[from] LtlError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCase {
    pub case_id: String,
    pub trace: Trace,
    pub label: bool,
}

/// A set of labelled cases over one shared alphabet. Case order is
/// meaningful: it is the chronological order used for train/test splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub alphabet: Alphabet,
    pub cases: Vec<LabeledCase>,
}

impl EventLog {
    pub fn new(alphabet: Alphabet, cases: Vec<LabeledCase>) -> Result<Self, LogError> {
        let mut seen = std::collections::HashSet::new();
        for case in &cases {
            if !seen.insert(case.case_id.as_str()) {
                return Err(LogError::DuplicateCase(case.case_id.clone()));
            }
            if let Some(a) = case.trace.iter().find(|a| !alphabet.contains(*a)) {
                return Err(LtlError::AlphabetMismatch(a.index()).into());
            }
        }
        Ok(EventLog { alphabet, cases })
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn traces(&self) -> impl Iterator<Item = &Trace> {
        self.cases.iter().map(|c| &c.trace)
    }

    pub fn case(&self, case_id: &str) -> Option<&LabeledCase> {
        self.cases.iter().find(|c| c.case_id == case_id)
    }

    pub fn mean_length(&self) -> f64 {
        if self.cases.is_empty() {
            return 0.0;
        }
        self.traces().map(Trace::len).sum::<usize>() as f64 / self.cases.len() as f64
    }

    pub fn positive_rate(&self) -> f64 {
        if self.cases.is_empty() {
            return 0.0;
        }
        self.cases.iter().filter(|c| c.label).count() as f64 / self.cases.len() as f64
    }

    /// Keeps the cases of length at least `n`, truncated to their first `n`
    /// events. Labels still describe the complete case.
    pub fn prefixes(&self, n: usize) -> EventLog {
        let cases = self
            .cases
            .iter()
            .filter_map(|c| {
                c.trace.prefix(n).map(|trace| LabeledCase {
                    case_id: c.case_id.clone(),
                    trace,
                    label: c.label,
                })
            })
            .collect();
        EventLog {
            alphabet: self.alphabet.clone(),
            cases,
        }
    }

    /// Chronological split into consecutive slices with the given fractions;
    /// the last slice takes the remainder.
    pub fn split(&self, fractions: &[f64]) -> Vec<EventLog> {
        let n = self.cases.len();
        let mut out = Vec::with_capacity(fractions.len() + 1);
        let mut start = 0;
        let mut acc = 0.0;
        for f in fractions {
            acc += f;
            let end = ((acc * n as f64).round() as usize).clamp(start, n);
            out.push(self.slice(start, end));
            start = end;
        }
        out.push(self.slice(start, n));
        out
    }

    fn slice(&self, start: usize, end: usize) -> EventLog {
        EventLog {
            alphabet: self.alphabet.clone(),
            cases: self.cases[start..end].to_vec(),
        }
    }

    /// Per-position domains `D_i = { τ(i) | τ ∈ log }` for `i = 1..=horizon`.
    pub fn domains(&self, horizon: usize) -> Result<Domains, LogError> {
        let mut per_position = vec![ActivitySet::new(); horizon];
        for trace in self.traces() {
            for (k, a) in trace.iter().take(horizon).enumerate() {
                per_position[k].insert(a);
            }
        }
        if let Some(k) = per_position.iter().position(|d| d.is_empty()) {
            return Err(LogError::UncoveredPosition(k + 1));
        }
        Ok(Domains { per_position })
    }
}

/// Activities observed at each position of a reference log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domains {
    per_position: Vec<ActivitySet>,
}

impl Domains {
    pub fn new(per_position: Vec<ActivitySet>) -> Self {
        Domains { per_position }
    }

    pub fn horizon(&self) -> usize {
        self.per_position.len()
    }

    /// `D_i` for 1-based `i`.
    pub fn at(&self, i: usize) -> &ActivitySet {
        &self.per_position[i - 1]
    }

    pub fn contains(&self, i: usize, a: Activity) -> bool {
        self.per_position
            .get(i.wrapping_sub(1))
            .is_some_and(|d| d.contains(&a))
    }
}
