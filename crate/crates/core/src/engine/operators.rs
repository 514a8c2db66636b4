//! Variation operators. Every operator preserves the chromosome length.

use rand::Rng;

use crate::automata::Dfa;
use crate::log::{Domains, Trace};
use crate::ltl::{Activity, ActivitySet, FormulaSignature};

use super::EngineError;

fn same_length(traces: &[&Trace]) -> Result<usize, EngineError> {
    let n = traces[0].len();
    match traces.iter().find(|t| t.len() != n) {
        Some(t) => Err(EngineError::LengthMismatch {
            expected: n,
            found: t.len(),
        }),
        None => Ok(n),
    }
}

fn pick<R: Rng + ?Sized>(
    set: impl ExactSizeIterator<Item = Activity>,
    rng: &mut R,
) -> Option<Activity> {
    let mut set = set;
    match set.len() {
        0 => None,
        n => set.nth(rng.gen_range(0..n)),
    }
}

/// Crossover that keeps the query's genes mentioned by the formula and fills
/// the others from the parents, never copying a mentioned activity. The
/// output satisfies the formula whenever the query does.
pub fn constrained_crossover<R: Rng + ?Sized>(
    p1: &Trace,
    p2: &Trace,
    query: &Trace,
    sig: &FormulaSignature,
    p_c: f64,
    rng: &mut R,
) -> Result<Trace, EngineError> {
    let n = same_length(&[query, p1, p2])?;
    let mut out = query.clone();
    for i in 1..=n {
        let p: f64 = rng.gen();
        if sig.is_active(query.at(i)) {
            continue;
        }
        let gene = if p < p_c && !sig.is_active(p1.at(i)) {
            p1.at(i)
        } else if p >= p_c && !sig.is_active(p2.at(i)) {
            p2.at(i)
        } else {
            query.at(i)
        };
        out.set(i, gene);
    }
    Ok(out)
}

/// Uniform crossover: each gene comes from `p1` with probability `p_c`.
pub fn standard_crossover<R: Rng + ?Sized>(
    p1: &Trace,
    p2: &Trace,
    p_c: f64,
    rng: &mut R,
) -> Result<Trace, EngineError> {
    let n = same_length(&[p1, p2])?;
    let mut out = p1.clone();
    for i in 1..=n {
        let p: f64 = rng.gen();
        if p >= p_c {
            out.set(i, p2.at(i));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub enum Mutation<'a> {
    /// Any activity of `D_i`.
    Standard,
    /// Unmentioned genes only, replaced by unmentioned activities of `D_i`.
    APriori(&'a FormulaSignature),
    /// Activities of `D_i` that keep the automaton run unchanged, checked
    /// against the partially mutated trace.
    Online(&'a Dfa),
}

/// Mutates each gene with probability `p_mut`. A gene whose sampling set is
/// empty stays as it is.
pub fn mutate<R: Rng + ?Sized>(
    offspring: &Trace,
    mode: Mutation<'_>,
    domains: &Domains,
    p_mut: f64,
    rng: &mut R,
) -> Result<Trace, EngineError> {
    let n = offspring.len();
    if domains.horizon() < n {
        return Err(EngineError::LengthMismatch {
            expected: domains.horizon(),
            found: n,
        });
    }
    let mut out = offspring.clone();
    let mut state = match mode {
        Mutation::Online(dfa) => dfa.initial(),
        _ => 0,
    };
    for i in 1..=n {
        let p: f64 = rng.gen();
        let current = out.at(i);
        if p < p_mut {
            let d = domains.at(i);
            let drawn = match mode {
                Mutation::Standard => pick(d.iter().copied(), rng),
                Mutation::APriori(sig) if !sig.is_active(current) => {
                    let pool: Vec<Activity> =
                        d.iter().copied().filter(|&a| !sig.is_active(a)).collect();
                    pick(pool.into_iter(), rng)
                }
                Mutation::APriori(_) => None,
                Mutation::Online(dfa) => {
                    let target = dfa.next(state, current);
                    let pool: Vec<Activity> = d
                        .iter()
                        .copied()
                        .filter(|&a| dfa.next(state, a) == target)
                        .collect();
                    pick(pool.into_iter(), rng)
                }
            };
            if let Some(a) = drawn {
                out.set(i, a);
            }
        }
        if let Mutation::Online(dfa) = mode {
            state = dfa.next(state, out.at(i));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryOutcome {
    pub trace: Trace,
    /// Mutation attempts rejected by the automaton.
    pub rejected: usize,
    /// True when every attempt was rejected and the input came back.
    pub exhausted: bool,
}

/// Standard mutation, resampled until the automaton accepts the result. After
/// `max_retries` rejected retries the input is returned unchanged.
pub fn mutate_and_retry<R: Rng + ?Sized>(
    offspring: &Trace,
    dfa: &Dfa,
    domains: &Domains,
    p_mut: f64,
    rng: &mut R,
    max_retries: usize,
) -> Result<RetryOutcome, EngineError> {
    for rejected in 0..=max_retries {
        let candidate = mutate(offspring, Mutation::Standard, domains, p_mut, rng)?;
        if dfa.accepts(&candidate)? {
            return Ok(RetryOutcome {
                trace: candidate,
                rejected,
                exhausted: false,
            });
        }
    }
    Ok(RetryOutcome {
        trace: offspring.clone(),
        rejected: max_retries + 1,
        exhausted: true,
    })
}

/// A uniformly random trace with gene `i` drawn from `D_i`.
pub fn random_trace<R: Rng + ?Sized>(domains: &Domains, n: usize, rng: &mut R) -> Trace {
    let genes = (1..=n)
        .map(|i| pick(domains.at(i).iter().copied(), rng).expect("domains are nonempty"))
        .collect();
    Trace::new(genes).expect("n is positive")
}

/// `D_i ∩ Θ_other`, the aPriori sampling set at instant `i`.
pub fn apriori_pool(domains: &Domains, sig: &FormulaSignature, i: usize) -> ActivitySet {
    domains
        .at(i)
        .iter()
        .copied()
        .filter(|&a| !sig.is_active(a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::compile;
    use crate::ltl::{holds_at, parse_formula, signature, Alphabet, Formula};
    use crate::testing::arb_formula;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SIGMA: [&str; 10] = [
        "apply", "aut_chk", "man_chk", "phone", "ok", "offer", "book", "send_doc", "sms", "email",
    ];

    fn setup() -> (Alphabet, Formula, Trace) {
        let s = Alphabet::new(SIGMA).unwrap();
        let phi = parse_formula("(!man_chk) U aut_chk", &s).unwrap();
        let tau1 = Trace::from_names(
            &s,
            &[
                "apply", "aut_chk", "man_chk", "phone", "ok", "offer", "phone", "book",
            ],
        )
        .unwrap();
        (s, phi, tau1)
    }

    fn full_domains(s: &Alphabet, n: usize) -> Domains {
        Domains::new(vec![s.all(); n])
    }

    #[test]
    fn crossover_identities() {
        let (s, phi, tau1) = setup();
        let sig = signature(&phi, &s);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let c = constrained_crossover(&tau1, &tau1, &tau1, &sig, 0.5, &mut rng).unwrap();
            assert_eq!(c, tau1);
        }
        let other = Trace::new(vec![Activity::new(9); 8]).unwrap();
        assert_eq!(
            standard_crossover(&tau1, &other, 1.0, &mut rng).unwrap(),
            tau1
        );
        assert_eq!(
            standard_crossover(&tau1, &other, 0.0, &mut rng).unwrap(),
            other
        );
        assert_eq!(
            standard_crossover(&tau1, &tau1, 0.3, &mut rng).unwrap(),
            tau1
        );
        assert!(standard_crossover(&tau1, &tau1.prefix(3).unwrap(), 0.3, &mut rng).is_err());
    }

    #[test]
    fn crossover_pins_checks() {
        let (s, phi, tau1) = setup();
        let sig = signature(&phi, &s);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p1 = Trace::new(vec![Activity::new(8); 8]).unwrap();
        let p2 = Trace::new(vec![Activity::new(2); 8]).unwrap();
        for _ in 0..100 {
            let c = constrained_crossover(&p1, &p2, &tau1, &sig, 0.5, &mut rng).unwrap();
            assert_eq!(s.name(c.at(2)), "aut_chk");
            assert_eq!(s.name(c.at(3)), "man_chk");
            // p2 only offers man_chk, which is mentioned, so the query gene stays
            for i in [1, 4, 5, 6, 7, 8] {
                assert!(c.at(i) == tau1.at(i) || c.at(i) == p1.at(i));
            }
        }
    }

    #[test]
    fn mutation_sampling_sets() {
        let (s, phi, tau1) = setup();
        let sig = signature(&phi, &s);
        let dfa = compile(&phi, &s).unwrap();
        let d = full_domains(&s, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut apriori_seen = ActivitySet::new();
        let mut online_seen = ActivitySet::new();
        for _ in 0..2000 {
            let a = mutate(&tau1, Mutation::APriori(&sig), &d, 1.0, &mut rng).unwrap();
            assert_eq!(a.at(2), tau1.at(2));
            assert_eq!(a.at(3), tau1.at(3));
            apriori_seen.insert(a.at(4));
            let o = mutate(&tau1, Mutation::Online(&dfa), &d, 1.0, &mut rng).unwrap();
            online_seen.insert(o.at(4));
        }
        assert_eq!(apriori_seen, apriori_pool(&d, &sig, 4));
        assert_eq!(online_seen, s.all());
        assert_eq!(
            mutate(&tau1, Mutation::Standard, &d, 0.0, &mut rng).unwrap(),
            tau1
        );
        assert_eq!(
            mutate(&tau1, Mutation::Online(&dfa), &d, 0.0, &mut rng).unwrap(),
            tau1
        );
    }

    #[test]
    fn empty_pool_keeps_gene() {
        let (s, phi, tau1) = setup();
        let sig = signature(&phi, &s);
        let aut = s.get("aut_chk").unwrap();
        let d = Domains::new(vec![[aut].into(); 8]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = mutate(&tau1, Mutation::APriori(&sig), &d, 1.0, &mut rng).unwrap();
        assert_eq!(a, tau1);
    }

    #[test]
    fn retry_counts_rejections() {
        let s = Alphabet::new(["a", "b"]).unwrap();
        let phi = parse_formula("G !b", &s).unwrap();
        let dfa = compile(&phi, &s).unwrap();
        let t = Trace::from_names(&s, &["a", "a", "a", "a"]).unwrap();
        let d = full_domains(&s, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rejected = 0;
        for _ in 0..100 {
            let r = mutate_and_retry(&t, &dfa, &d, 0.9, &mut rng, 3).unwrap();
            assert!(dfa.accepts(&r.trace).unwrap());
            rejected += r.rejected;
            if r.exhausted {
                assert_eq!(r.trace, t);
            }
        }
        assert!(rejected > 0);
        let truth = compile(&Formula::True, &s).unwrap();
        let r = mutate_and_retry(&t, &truth, &d, 0.9, &mut rng, 3).unwrap();
        assert_eq!(r.rejected, 0);
    }

    #[test]
    fn random_traces_stay_in_domains() {
        let s = Alphabet::new(["a", "b", "c"]).unwrap();
        let d = Domains::new(vec![
            [Activity::new(0)].into(),
            [Activity::new(1), Activity::new(2)].into(),
            s.all(),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let t = random_trace(&d, 3, &mut rng);
            assert!((1..=3).all(|i| d.contains(i, t.at(i))));
        }
    }

    fn sized(k: usize) -> Alphabet {
        Alphabet::new((0..k).map(|i| format!("a{i}"))).unwrap()
    }

    /// A formula, a satisfying query found by rejection, two parents and an
    /// RNG seed, over an alphabet of 3 to 6 activities.
    fn case() -> impl Strategy<Value = (usize, Formula, Trace, Trace, Trace, u64)> {
        (3usize..=6, 1usize..=6)
            .prop_flat_map(|(k, n)| {
                let v = move || prop::collection::vec(0..k, n);
                (
                    Just(k),
                    arb_formula(k),
                    prop::collection::vec(v(), 64),
                    v(),
                    v(),
                    any::<u64>(),
                )
            })
            .prop_filter_map("no satisfying query", |(k, f, pool, a, b, seed)| {
                let mk =
                    |v: Vec<usize>| Trace::new(v.into_iter().map(Activity::new).collect()).unwrap();
                let q = pool.into_iter().map(mk).find(|t| holds_at(t, 1, &f))?;
                Some((k, f, q, mk(a), mk(b), seed))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn crossover_preserves_formula((k, f, q, p1, p2, seed) in case(), p_c in 0.0f64..=1.0) {
            let s = sized(k);
            let sig = signature(&f, &s);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = constrained_crossover(&p1, &p2, &q, &sig, p_c, &mut rng).unwrap();
            prop_assert_eq!(c.len(), q.len());
            prop_assert!(holds_at(&c, 1, &f));
            for i in 1..=q.len() {
                if sig.is_active(q.at(i)) {
                    prop_assert_eq!(c.at(i), q.at(i));
                }
                prop_assert_eq!(sig.is_active(c.at(i)), sig.is_active(q.at(i)));
            }
        }

        #[test]
        fn mutation_preserves_formula((k, f, q, _p1, _p2, seed) in case(), p_mut in 0.0f64..=1.0) {
            let s = sized(k);
            let sig = signature(&f, &s);
            let dfa = compile(&f, &s).unwrap();
            let d = full_domains(&s, q.len());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = mutate(&q, Mutation::APriori(&sig), &d, p_mut, &mut rng).unwrap();
            prop_assert!(holds_at(&a, 1, &f));
            for i in 1..=q.len() {
                prop_assert_eq!(sig.is_active(a.at(i)), sig.is_active(q.at(i)));
            }
            let o = mutate(&q, Mutation::Online(&dfa), &d, p_mut, &mut rng).unwrap();
            prop_assert!(holds_at(&o, 1, &f));
            prop_assert_eq!(o.len(), q.len());
            let r = mutate_and_retry(&q, &dfa, &d, p_mut, &mut rng, 10).unwrap();
            prop_assert!(holds_at(&r.trace, 1, &f));
        }

        #[test]
        fn online_keeps_run_suffix((k, f, q, _p1, _p2, seed) in case()) {
            let s = sized(k);
            let dfa = compile(&f, &s).unwrap();
            let d = full_domains(&s, q.len());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let before = dfa.run_path(&q).unwrap();
            // a single-gene mutation at each position in turn
            for i in 1..=q.len() {
                let safe = dfa.safe_activities(&q, i).unwrap();
                let a = pick(safe.iter().copied(), &mut rng).unwrap();
                let after = dfa.run_path(&q.with(i, a)).unwrap();
                prop_assert_eq!(&after.states[i..], &before.states[i..]);
            }
            let m = mutate(&q, Mutation::Online(&dfa), &d, 0.5, &mut rng).unwrap();
            prop_assert_eq!(dfa.run_path(&m).unwrap().states, before.states);
        }
    }
}
