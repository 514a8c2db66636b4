//! Deterministic automata for LTL formulas on finite traces.
//!
//! [`compile`] turns a formula into a minimal, total DFA whose language is
//! exactly the set of nonempty traces satisfying it. Letters are single
//! activities, so the transition table is a dense `states × |Σ|` array.

mod bdd;
mod compile;
mod minimize;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::log::Trace;
use crate::ltl::{Activity, ActivitySet, Alphabet, Formula, LtlError};

pub const DEFAULT_MAX_STATES: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("automaton exceeds the state budget of {0} states")]
    StateBudget(usize),
    #[error("activity #{0} is not part of the automaton's alphabet")]
    AlphabetMismatch(usize),
    #[error("instant {instant} is outside 1..={len}")]
    InstantOutOfRange { instant: usize, len: usize },
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error(transparent)]
    Ltl(#[from] LtlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub max_states: usize,
    pub minimize: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            max_states: DEFAULT_MAX_STATES,
            minimize: true,
        }
    }
}

/// Total DFA over an activity alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    alphabet: Alphabet,
    initial: usize,
    /// Row-major `num_states × |Σ|`.
    delta: Vec<usize>,
    accepting: Vec<bool>,
}

/// States visited while reading a trace; `states[i]` is reached after `i`
/// events, so the path is one longer than the trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunPath {
    pub states: Vec<usize>,
}

impl RunPath {
    pub fn last(&self) -> usize {
        *self.states.last().expect("run paths are never empty")
    }
}

pub fn compile(formula: &Formula, alphabet: &Alphabet) -> Result<Dfa, AutomataError> {
    compile_with(formula, alphabet, &CompileOptions::default())
}

pub fn compile_with(
    formula: &Formula,
    alphabet: &Alphabet,
    options: &CompileOptions,
) -> Result<Dfa, AutomataError> {
    formula.check_alphabet(alphabet)?;
    let raw = compile::explore(formula, alphabet, options.max_states)?;
    if !options.minimize {
        return Ok(raw);
    }
    let dfa = raw.minimize();
    // Acceptance of an initial state without incoming edges only concerns
    // the empty trace, which is outside the domain. Pick whichever marking
    // gives the smaller automaton.
    let reentered = raw.delta.contains(&raw.initial);
    if !reentered && !raw.accepting[raw.initial] {
        let mut flipped = raw;
        flipped.accepting[flipped.initial] = true;
        let alt = flipped.minimize();
        if alt.num_states() < dfa.num_states() {
            return Ok(alt);
        }
    }
    Ok(dfa)
}

impl Dfa {
    pub(crate) fn from_raw(
        alphabet: Alphabet,
        initial: usize,
        delta: Vec<usize>,
        accepting: Vec<bool>,
    ) -> Dfa {
        debug_assert_eq!(delta.len(), accepting.len() * alphabet.len());
        Dfa {
            alphabet,
            initial,
            delta,
            accepting,
        }
    }

    /// Builds a DFA from an explicit table, one row per state with one target
    /// per activity.
    pub fn from_table(
        alphabet: Alphabet,
        initial: usize,
        rows: Vec<Vec<usize>>,
        accepting: Vec<bool>,
    ) -> Result<Dfa, AutomataError> {
        let n = rows.len();
        if n == 0 || accepting.len() != n || initial >= n {
            return Err(AutomataError::Malformed(format!(
                "{n} rows, {} acceptance flags, initial state {initial}",
                accepting.len()
            )));
        }
        if let Some((q, _)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != alphabet.len() || r.iter().any(|&p| p >= n))
        {
            return Err(AutomataError::Malformed(format!("row {q} is not total")));
        }
        Ok(Dfa::from_raw(alphabet, initial, rows.concat(), accepting))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.num_states())
            .filter(|&q| self.accepting[q])
            .collect()
    }

    #[inline]
    pub fn next(&self, q: usize, a: Activity) -> usize {
        self.delta[q * self.alphabet.len() + a.index()]
    }

    pub(crate) fn row(&self, q: usize) -> &[usize] {
        let k = self.alphabet.len();
        &self.delta[q * k..(q + 1) * k]
    }

    fn check(&self, trace: &Trace) -> Result<(), AutomataError> {
        match trace.iter().find(|&a| !self.alphabet.contains(a)) {
            Some(a) => Err(AutomataError::AlphabetMismatch(a.index())),
            None => Ok(()),
        }
    }

    pub fn run_path(&self, trace: &Trace) -> Result<RunPath, AutomataError> {
        self.check(trace)?;
        let mut states = Vec::with_capacity(trace.len() + 1);
        let mut q = self.initial;
        states.push(q);
        for a in trace.iter() {
            q = self.next(q, a);
            states.push(q);
        }
        Ok(RunPath { states })
    }

    pub fn accepts(&self, trace: &Trace) -> Result<bool, AutomataError> {
        self.check(trace)?;
        let end = trace.iter().fold(self.initial, |q, a| self.next(q, a));
        Ok(self.accepting[end])
    }

    /// Activities that can replace `trace(i)` without changing the run:
    /// `{ a : δ(q_{i-1}, a) = q_i }`.
    pub fn safe_activities(&self, trace: &Trace, i: usize) -> Result<ActivitySet, AutomataError> {
        if i == 0 || i > trace.len() {
            return Err(AutomataError::InstantOutOfRange {
                instant: i,
                len: trace.len(),
            });
        }
        self.check(trace)?;
        let before = trace.activities()[..i - 1]
            .iter()
            .fold(self.initial, |q, &a| self.next(q, a));
        let after = self.next(before, trace.at(i));
        Ok(self.safe_between(before, after))
    }

    /// Activities leading from `from` to `to` in one step.
    pub fn safe_between(&self, from: usize, to: usize) -> ActivitySet {
        self.alphabet
            .activities()
            .filter(|&a| self.next(from, a) == to)
            .collect()
    }

    /// True when no accepting state is reachable from `q`.
    pub fn is_trap(&self, q: usize) -> bool {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![q];
        seen[q] = true;
        while let Some(p) = stack.pop() {
            if self.accepting[p] {
                return false;
            }
            for &r in self.row(p) {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        true
    }

    /// Minimal equivalent DFA, restricted to reachable states and numbered
    /// breadth first from the initial state.
    pub fn minimize(&self) -> Dfa {
        minimize::minimize(self)
    }

    /// Graphviz rendering. Parallel edges are merged into one edge labelled
    /// with the activity names in id order.
    pub fn export_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  start [shape=point];\n");
        for q in 0..self.num_states() {
            let shape = if self.accepting[q] {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(out, "  q{q} [shape={shape}];");
        }
        let _ = writeln!(out, "  start -> q{};", self.initial);
        for q in 0..self.num_states() {
            let mut targets: Vec<(usize, Vec<&str>)> = Vec::new();
            for a in self.alphabet.activities() {
                let p = self.next(q, a);
                match targets.iter_mut().find(|(t, _)| *t == p) {
                    Some((_, names)) => names.push(self.alphabet.name(a)),
                    None => targets.push((p, vec![self.alphabet.name(a)])),
                }
            }
            targets.sort_by_key(|(p, _)| *p);
            for (p, names) in targets {
                let _ = writeln!(out, "  q{q} -> q{p} [label=\"{}\"];", names.join(", "));
            }
        }
        out.push_str("}\n");
        out
    }
}
