use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::ltl::{Activity, Alphabet};

use super::LogError;

/// A finite, nonempty activity sequence. Instants are 1-based in the public
/// API (`at`, `prefix`); the `Index` impl and slices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Activity>", into = "Vec<Activity>")]
pub struct Trace(Vec<Activity>);

impl Trace {
    pub fn new(activities: Vec<Activity>) -> Result<Self, LogError> {
        if activities.is_empty() {
            return Err(LogError::EmptyTrace);
        }
        Ok(Trace(activities))
    }

    /// Builds a trace from activity names, all of which must be in `alphabet`.
    pub fn from_names<S: AsRef<str>>(alphabet: &Alphabet, names: &[S]) -> Result<Self, LogError> {
        let ids = names
            .iter()
            .map(|n| {
                alphabet
                    .get(n.as_ref())
                    .ok_or_else(|| LogError::UnknownActivity(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Trace::new(ids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Activity at 1-based instant `i`.
    #[inline]
    pub fn at(&self, i: usize) -> Activity {
        self.0[i - 1]
    }

    pub fn activities(&self) -> &[Activity] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Activity> + '_ {
        self.0.iter().copied()
    }

    /// The prefix `τ(:n)`; `None` when `n` is zero or exceeds the length.
    pub fn prefix(&self, n: usize) -> Option<Trace> {
        (n >= 1 && n <= self.0.len()).then(|| Trace(self.0[..n].to_vec()))
    }

    /// Copy with the activity at 1-based instant `i` replaced.
    pub fn with(&self, i: usize, activity: Activity) -> Trace {
        let mut out = self.0.clone();
        out[i - 1] = activity;
        Trace(out)
    }

    pub(crate) fn set(&mut self, i: usize, activity: Activity) {
        self.0[i - 1] = activity;
    }

    /// True when every id is valid for `alphabet`.
    pub fn fits(&self, alphabet: &Alphabet) -> bool {
        self.0.iter().all(|&a| alphabet.contains(a))
    }

    pub fn names<'a>(&self, alphabet: &'a Alphabet) -> Vec<&'a str> {
        alphabet.names_of(&self.0)
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        DisplayTrace {
            trace: self,
            alphabet,
        }
    }
}

struct DisplayTrace<'a> {
    trace: &'a Trace,
    alphabet: &'a Alphabet,
}

impl fmt::Display for DisplayTrace<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, a) in self.trace.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            f.write_str(self.alphabet.name(a))?;
        }
        Ok(())
    }
}

impl Index<usize> for Trace {
    type Output = Activity;

    fn index(&self, index: usize) -> &Activity {
        &self.0[index]
    }
}

impl TryFrom<Vec<Activity>> for Trace {
    type Error = LogError;

    fn try_from(v: Vec<Activity>) -> Result<Self, Self::Error> {
        Trace::new(v)
    }
}

impl From<Trace> for Vec<Activity> {
    fn from(t: Trace) -> Self {
        t.0
    }
}
