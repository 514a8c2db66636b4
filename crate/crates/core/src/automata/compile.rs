//! Derivative construction.
//!
//! A residual is a Boolean combination of obligation variables. Variable
//! `LIVE` stands for "at least one more instant follows"; every other variable
//! stands for a temporal subformula that must hold on the remainder of the
//! trace (the body of a `X`, or an `U` term). Reading activity `a` substitutes
//! each variable by its one-step derivative, so the successor residual is
//! again a Boolean combination of the same finite variable set. Keeping
//! residuals as reduced decision diagrams makes equal residuals identical.

use std::collections::{HashMap, VecDeque};

use crate::ltl::{Activity, Alphabet, Formula};

use super::bdd::{Bdd, NodeId, FALSE, TRUE};
use super::{AutomataError, Dfa};

const LIVE: u32 = 0;

struct Compiler<'a> {
    alphabet: &'a Alphabet,
    bdd: Bdd,
    vars: HashMap<Formula, u32>,
    /// Formula per variable; index 0 (`LIVE`) has none.
    var_formulas: Vec<Option<Formula>>,
    /// Derivative of each variable, per activity.
    subst: HashMap<(u32, Activity), NodeId>,
}

impl<'a> Compiler<'a> {
    fn new(alphabet: &'a Alphabet) -> Self {
        Compiler {
            alphabet,
            bdd: Bdd::new(),
            vars: HashMap::new(),
            var_formulas: vec![None],
            subst: HashMap::new(),
        }
    }

    fn var(&mut self, f: &Formula) -> NodeId {
        let v = match self.vars.get(f) {
            Some(&v) => v,
            None => {
                let v = self.var_formulas.len() as u32;
                self.vars.insert(f.clone(), v);
                self.var_formulas.push(Some(f.clone()));
                v
            }
        };
        self.bdd.var(v)
    }

    fn derive(&mut self, f: &Formula, a: Activity) -> NodeId {
        match f {
            Formula::True => TRUE,
            Formula::False => FALSE,
            Formula::Atom(b) => Bdd::constant(*b == a),
            Formula::Not(g) => {
                let d = self.derive(g, a);
                self.bdd.not(d)
            }
            Formula::And(l, r) => {
                let (dl, dr) = (self.derive(l, a), self.derive(r, a));
                self.bdd.and(dl, dr)
            }
            Formula::Or(l, r) => {
                let (dl, dr) = (self.derive(l, a), self.derive(r, a));
                self.bdd.or(dl, dr)
            }
            Formula::Next(g) => {
                let body = self.var(g);
                let live = self.bdd.var(LIVE);
                self.bdd.and(body, live)
            }
            Formula::Until(l, r) => {
                let dr = self.derive(r, a);
                let dl = self.derive(l, a);
                let again = self.var(f);
                let keep = self.bdd.and(dl, again);
                self.bdd.or(dr, keep)
            }
        }
    }

    fn substitution(&mut self, v: u32, a: Activity) -> NodeId {
        if v == LIVE {
            return TRUE;
        }
        if let Some(&d) = self.subst.get(&(v, a)) {
            return d;
        }
        let f = self.var_formulas[v as usize]
            .clone()
            .expect("obligation variable");
        let d = self.derive(&f, a);
        self.subst.insert((v, a), d);
        d
    }

    fn step(&mut self, state: NodeId, a: Activity, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        if self.bdd.is_terminal(state) {
            return state;
        }
        if let Some(&r) = memo.get(&state) {
            return r;
        }
        let v = self.bdd.var_of(state);
        let (lo, hi) = (self.bdd.low(state), self.bdd.high(state));
        let lo = self.step(lo, a, memo);
        let hi = self.step(hi, a, memo);
        let c = self.substitution(v, a);
        let r = self.bdd.ite(c, hi, lo);
        memo.insert(state, r);
        r
    }
}

/// Explores the reachable residuals of `formula` breadth first, activities in
/// id order. The result is total but not minimized.
pub(crate) fn explore(
    formula: &Formula,
    alphabet: &Alphabet,
    max_states: usize,
) -> Result<Dfa, AutomataError> {
    let mut c = Compiler::new(alphabet);
    let init = c.var(formula);
    let k = alphabet.len();

    let mut ids: HashMap<NodeId, usize> = HashMap::from([(init, 0)]);
    let mut residuals = vec![init];
    let mut queue = VecDeque::from([0usize]);
    let mut delta: Vec<usize> = Vec::new();

    while let Some(q) = queue.pop_front() {
        let state = residuals[q];
        let mut row = vec![0; k];
        for (slot, a) in row.iter_mut().zip(c.alphabet.activities()) {
            let mut memo = HashMap::new();
            let next = c.step(state, a, &mut memo);
            *slot = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = residuals.len();
                    if id >= max_states {
                        return Err(AutomataError::StateBudget(max_states));
                    }
                    ids.insert(next, id);
                    residuals.push(next);
                    queue.push_back(id);
                    id
                }
            };
        }
        // BFS dequeues states in id order, so rows land at index q.
        debug_assert_eq!(delta.len(), q * k);
        delta.extend(row);
    }

    let accepting = residuals.iter().map(|&r| c.bdd.all_false(r)).collect();
    log::debug!("explored {} residual states", residuals.len());
    Ok(Dfa::from_raw(alphabet.clone(), 0, delta, accepting))
}
