//! Shared generators for property tests.

use proptest::prelude::*;

use crate::log::Trace;
use crate::ltl::{Activity, Formula};

/// Random core formulas over the first `k` activities, depth at most 4.
pub(crate) fn arb_formula(k: usize) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        (0..k).prop_map(|a| Formula::Atom(Activity::new(a))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Formula::until(l, r)),
        ]
    })
}

pub(crate) fn arb_trace(k: usize) -> impl Strategy<Value = Trace> {
    prop::collection::vec(0..k, 1..8)
        .prop_map(|v| Trace::new(v.into_iter().map(Activity::new).collect()).unwrap())
}

/// Every trace over `k` activities with length in `1..=max_len`.
pub(crate) fn all_traces(k: usize, max_len: usize) -> Vec<Trace> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Activity>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * k);
        for t in &layer {
            for a in 0..k {
                let mut t = t.clone();
                t.push(Activity::new(a));
                next.push(t);
            }
        }
        out.extend(next.iter().map(|t| Trace::new(t.clone()).unwrap()));
        layer = next;
    }
    out
}
