//! Temporally constrained counterfactual explanations for activity traces.
//!
//! Background knowledge is written as an LTL formula over finite process
//! traces ([`ltl`]), compiled into a minimal DFA ([`automata`]), and enforced
//! by the crossover and mutation operators of a genetic search ([`engine`])
//! so every generated counterfactual satisfies it by construction.

pub mod automata;
pub mod engine;
pub mod log;
pub mod ltl;
pub mod metrics;
pub mod model;

#[cfg(test)]
mod testing;
