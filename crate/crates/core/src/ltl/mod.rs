//! Linear temporal logic on process traces.
//!
//! Formulas are interpreted over finite, nonempty traces in which every
//! instant carries exactly one activity. The parser desugars `->`, `F` and `G`
//! so the rest of the crate only sees the seven core node kinds of
//! [`Formula`]. [`evaluate`] implements the trace semantics by direct
//! recursion and serves as the reference against which compiled automata are
//! checked.

mod alphabet;
mod eval;
mod parser;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use alphabet::{Activity, ActivitySet, Alphabet};
pub use eval::{evaluate, holds_at};
pub use parser::parse_formula;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtlError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown activity `{token}` at line {line}, column {column}")]
    UnknownActivity {
        token: String,
        line: usize,
        column: usize,
    },
    #[error("activity #{0} is not part of the alphabet")]
    AlphabetMismatch(usize),
    #[error("duplicate activity name `{0}`")]
    DuplicateActivity(String),
    #[error("invalid activity name `{0}`")]
    InvalidActivityName(String),
    #[error("alphabet must contain at least one activity")]
    EmptyAlphabet,
    #[error("traces must contain at least one event")]
    EmptyTrace,
}

/// Core LTLp syntax tree. Subtrees are reference counted so cloning and
/// rebuilding derived forms is cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Activity),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    /// Strong next: fails at the last instant.
    Next(Arc<Formula>),
    Until(Arc<Formula>, Arc<Formula>),
}

impl Formula {
    pub fn atom(a: Activity) -> Formula {
        Formula::Atom(a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Arc::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Arc::new(l), Arc::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Arc::new(l), Arc::new(r))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Arc::new(f))
    }

    pub fn until(l: Formula, r: Formula) -> Formula {
        Formula::Until(Arc::new(l), Arc::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::or(Formula::not(l), r)
    }

    /// `F φ = true U φ`
    pub fn eventually(f: Formula) -> Formula {
        Formula::until(Formula::True, f)
    }

    /// `G φ = ¬F¬φ`
    pub fn globally(f: Formula) -> Formula {
        Formula::not(Formula::eventually(Formula::not(f)))
    }

    /// Weak next `¬X¬φ`: holds at the last instant.
    pub fn weak_next(f: Formula) -> Formula {
        Formula::not(Formula::next(Formula::not(f)))
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Next(f) => 1 + f.size(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(l, r) => {
                1 + l.size() + r.size()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Next(f) => 1 + f.depth(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(l, r) => {
                1 + l.depth().max(r.depth())
            }
        }
    }

    /// The activities mentioned by the formula (Σ_φ).
    pub fn atoms(&self) -> ActivitySet {
        let mut out = ActivitySet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut ActivitySet) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert(*a);
            }
            Formula::Not(f) | Formula::Next(f) => f.collect_atoms(out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Checks every atom against `alphabet`.
    pub fn check_alphabet(&self, alphabet: &Alphabet) -> Result<(), LtlError> {
        match self.atoms().into_iter().find(|a| !alphabet.contains(*a)) {
            Some(a) => Err(LtlError::AlphabetMismatch(a.index())),
            None => Ok(()),
        }
    }

    /// Fully parenthesised concrete syntax that [`parse_formula`] reads back
    /// to the same tree.
    pub fn render<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        Rendered {
            formula: self,
            alphabet,
        }
    }
}

struct Rendered<'a> {
    formula: &'a Formula,
    alphabet: &'a Alphabet,
}

impl<'a> Rendered<'a> {
    fn child(&self, formula: &'a Formula) -> Rendered<'a> {
        Rendered {
            formula,
            alphabet: self.alphabet,
        }
    }
}

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.formula {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => f.write_str(self.alphabet.name(*a)),
            Formula::Not(g) => write!(f, "!{}", self.child(g)),
            Formula::Next(g) => write!(f, "X {}", self.child(g)),
            Formula::And(l, r) => write!(f, "({} & {})", self.child(l), self.child(r)),
            Formula::Or(l, r) => write!(f, "({} | {})", self.child(l), self.child(r)),
            Formula::Until(l, r) => write!(f, "({} U {})", self.child(l), self.child(r)),
        }
    }
}

/// Partition of the alphabet into activities mentioned by a formula and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaSignature {
    pub active: ActivitySet,
    pub other: ActivitySet,
}

impl FormulaSignature {
    pub fn is_active(&self, a: Activity) -> bool {
        self.active.contains(&a)
    }

    /// Coverage |Σ_φ| / |Σ|.
    pub fn coverage(&self) -> f64 {
        let total = self.active.len() + self.other.len();
        self.active.len() as f64 / total as f64
    }
}

pub fn signature(formula: &Formula, alphabet: &Alphabet) -> FormulaSignature {
    let active = formula.atoms();
    let other = alphabet
        .activities()
        .filter(|a| !active.contains(a))
        .collect();
    FormulaSignature { active, other }
}
