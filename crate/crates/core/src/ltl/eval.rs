use crate::log::Trace;

use super::{Alphabet, Formula, LtlError};

/// `τ, i ⊨ φ` for a 1-based instant `i` in `1..=len(τ)`, by direct recursion
/// on the inductive definition. No automata are involved.
pub fn holds_at(trace: &Trace, i: usize, formula: &Formula) -> bool {
    debug_assert!(i >= 1 && i <= trace.len());
    match formula {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => trace.at(i) == *a,
        Formula::Not(f) => !holds_at(trace, i, f),
        Formula::And(l, r) => holds_at(trace, i, l) && holds_at(trace, i, r),
        Formula::Or(l, r) => holds_at(trace, i, l) || holds_at(trace, i, r),
        Formula::Next(f) => i < trace.len() && holds_at(trace, i + 1, f),
        Formula::Until(l, r) => {
            for j in i..=trace.len() {
                if holds_at(trace, j, r) {
                    return true;
                }
                if !holds_at(trace, j, l) {
                    return false;
                }
            }
            false
        }
    }
}

/// `τ ⊨ φ`, i.e. `τ, 1 ⊨ φ`, after checking both sides against `alphabet`.
pub fn evaluate(trace: &Trace, formula: &Formula, alphabet: &Alphabet) -> Result<bool, LtlError> {
    if let Some(a) = trace.iter().find(|a| !alphabet.contains(*a)) {
        return Err(LtlError::AlphabetMismatch(a.index()));
    }
    formula.check_alphabet(alphabet)?;
    Ok(holds_at(trace, 1, formula))
}
