//! Hopcroft partition refinement followed by breadth-first renumbering, so
//! that equal languages give structurally equal automata.

use std::collections::{BTreeMap, VecDeque};

use super::Dfa;

fn reachable(dfa: &Dfa) -> Vec<bool> {
    let mut seen = vec![false; dfa.num_states()];
    let mut queue = VecDeque::from([dfa.initial()]);
    seen[dfa.initial()] = true;
    while let Some(q) = queue.pop_front() {
        for &p in dfa.row(q) {
            if !seen[p] {
                seen[p] = true;
                queue.push_back(p);
            }
        }
    }
    seen
}

/// Block index per state; equal blocks are language-equivalent.
fn refine(dfa: &Dfa, live: &[bool]) -> Vec<usize> {
    let n = dfa.num_states();
    let k = dfa.alphabet().len();

    let mut inverse = vec![vec![Vec::new(); n]; k];
    for q in (0..n).filter(|&q| live[q]) {
        for (c, &p) in dfa.row(q).iter().enumerate() {
            inverse[c][p].push(q);
        }
    }

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_of = vec![usize::MAX; n];
    for flag in [true, false] {
        let members: Vec<usize> = (0..n)
            .filter(|&q| live[q] && dfa.is_accepting(q) == flag)
            .collect();
        if !members.is_empty() {
            for &q in &members {
                block_of[q] = blocks.len();
            }
            blocks.push(members);
        }
    }

    let mut queued = vec![true; blocks.len()];
    let mut work: VecDeque<usize> = (0..blocks.len()).collect();
    while let Some(b) = work.pop_front() {
        queued[b] = false;
        let splitter = blocks[b].clone();
        for pre in &inverse {
            let mut touched: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &s in &splitter {
                for &p in &pre[s] {
                    touched.entry(block_of[p]).or_default().push(p);
                }
            }
            for (y, mut hit) in touched {
                hit.sort_unstable();
                hit.dedup();
                if hit.len() == blocks[y].len() {
                    continue;
                }
                let z = blocks.len();
                blocks[y].retain(|q| hit.binary_search(q).is_err());
                for &q in &hit {
                    block_of[q] = z;
                }
                blocks.push(hit);
                if queued[y] {
                    queued.push(true);
                    work.push_back(z);
                } else {
                    let smaller = if blocks[z].len() < blocks[y].len() {
                        z
                    } else {
                        y
                    };
                    queued.push(false);
                    queued[smaller] = true;
                    work.push_back(smaller);
                }
            }
        }
    }
    block_of
}

/// Quotient of `dfa` by `block_of`, renumbered in BFS order from the initial
/// block with activities visited in id order.
fn quotient(dfa: &Dfa, block_of: &[usize]) -> Dfa {
    let k = dfa.alphabet().len();
    let nblocks = block_of
        .iter()
        .filter(|&&b| b != usize::MAX)
        .max()
        .map_or(0, |b| b + 1);
    let mut rep = vec![usize::MAX; nblocks];
    for (q, &b) in block_of.iter().enumerate() {
        if b != usize::MAX && rep[b] == usize::MAX {
            rep[b] = q;
        }
    }

    let mut number = vec![usize::MAX; nblocks];
    let mut order = Vec::new();
    let start = block_of[dfa.initial()];
    number[start] = 0;
    order.push(start);
    let mut head = 0;
    while head < order.len() {
        let b = order[head];
        head += 1;
        for &p in dfa.row(rep[b]) {
            let t = block_of[p];
            if number[t] == usize::MAX {
                number[t] = order.len();
                order.push(t);
            }
        }
    }

    let mut delta = Vec::with_capacity(order.len() * k);
    let mut accepting = Vec::with_capacity(order.len());
    for &b in &order {
        delta.extend(dfa.row(rep[b]).iter().map(|&p| number[block_of[p]]));
        accepting.push(dfa.is_accepting(rep[b]));
    }
    Dfa::from_raw(dfa.alphabet().clone(), 0, delta, accepting)
}

pub(crate) fn minimize(dfa: &Dfa) -> Dfa {
    let live = reachable(dfa);
    let blocks = refine(dfa, &live);
    quotient(dfa, &blocks)
}
