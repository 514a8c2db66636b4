use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::LtlError;

/// Index of an activity inside its [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Activity(u16);

impl Activity {
    pub fn new(index: usize) -> Self {
        Activity(u16::try_from(index).expect("activity index exceeds u16"))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub type ActivitySet = BTreeSet<Activity>;

/// Ordered, duplicate-free set of activity names. Ids follow insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    names: Vec<String>,
    #[serde(skip)]
    lookup: HashMap<String, Activity>,
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, LtlError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Alphabet::empty();
        for name in names {
            let name = name.into();
            if alphabet.lookup.contains_key(&name) {
                return Err(LtlError::DuplicateActivity(name));
            }
            alphabet.push(name)?;
        }
        if alphabet.names.is_empty() {
            return Err(LtlError::EmptyAlphabet);
        }
        Ok(alphabet)
    }

    pub(crate) fn empty() -> Self {
        Alphabet {
            names: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    /// Returns the id of `name`, appending it when it is new.
    pub fn intern(&mut self, name: &str) -> Result<Activity, LtlError> {
        if let Some(&a) = self.lookup.get(name) {
            return Ok(a);
        }
        self.push(name.to_string())
    }

    fn push(&mut self, name: String) -> Result<Activity, LtlError> {
        if !is_valid_name(&name) {
            return Err(LtlError::InvalidActivityName(name));
        }
        let id = Activity::new(self.names.len());
        self.lookup.insert(name.clone(), id);
        self.names.push(name);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<Activity> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, activity: Activity) -> &str {
        &self.names[activity.index()]
    }

    pub fn contains(&self, activity: Activity) -> bool {
        activity.index() < self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn activities(&self) -> impl Iterator<Item = Activity> + '_ {
        (0..self.names.len()).map(Activity::new)
    }

    pub fn all(&self) -> ActivitySet {
        self.activities().collect()
    }

    pub fn names_of<'b>(&self, activities: impl IntoIterator<Item = &'b Activity>) -> Vec<&str> {
        activities.into_iter().map(|&a| self.name(a)).collect()
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = LtlError;

    fn try_from(names: Vec<String>) -> Result<Self, Self::Error> {
        Alphabet::new(names)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(alphabet: Alphabet) -> Self {
        alphabet.names
    }
}
