//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tempocf::bench::{run_bench, BenchFormula, BenchPlan, Cell};
use tempocf_core::automata::compile;
use tempocf_core::engine::{constrained_crossover, mutate, GaConfig, Mutation, Strategy};
use tempocf_core::log::{generate_claim_log, read_csv_log, CsvOptions, Domains, Trace};
use tempocf_core::ltl::{
    evaluate, parse_formula, signature, Activity, ActivitySet, Alphabet, Formula,
};
use tempocf_core::metrics::{distance, sparsity, CandidateMetrics, FitnessWeights};
use tempocf_core::model::{loss_and_gradient, Hyper};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn alphabet(k: usize) -> Alphabet {
    Alphabet::new((0..k).map(|i| format!("a{i}"))).unwrap()
}

/// Random formula of depth at most `depth`, including the derived operators.
fn random_formula(rng: &mut ChaCha8Rng, k: usize, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(Activity::new(rng.gen_range(0..k))),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, k, depth - 1);
    match rng.gen_range(0..9) {
        0 => Formula::not(sub(rng)),
        1 => Formula::next(sub(rng)),
        2 => Formula::weak_next(sub(rng)),
        3 => Formula::eventually(sub(rng)),
        4 => Formula::globally(sub(rng)),
        5 => Formula::and(sub(rng), sub(rng)),
        6 => Formula::or(sub(rng), sub(rng)),
        7 => Formula::implies(sub(rng), sub(rng)),
        _ => Formula::until(sub(rng), sub(rng)),
    }
}

fn random_trace(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Trace {
    Trace::new((0..n).map(|_| Activity::new(rng.gen_range(0..k))).collect()).unwrap()
}

fn random_domains(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Domains {
    let sets = (0..n)
        .map(|_| {
            let mut d: ActivitySet = (0..k)
                .filter(|_| rng.gen_bool(0.6))
                .map(Activity::new)
                .collect();
            d.insert(Activity::new(rng.gen_range(0..k)));
            d
        })
        .collect();
    Domains::new(sets)
}

struct Case {
    s: Alphabet,
    k: usize,
    formula: Formula,
    query: Trace,
    rng: ChaCha8Rng,
}

/// Draws a formula and a satisfying query found by rejection sampling.
fn draw_case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let k = rng.gen_range(3..=6);
        let s = alphabet(k);
        let formula = random_formula(&mut rng, k, 4);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let query = random_trace(&mut rng, k, n);
            if evaluate(&query, &formula, &s).unwrap() {
                return Case {
                    s,
                    k,
                    formula,
                    query,
                    rng,
                };
            }
        }
    }
}

const PROPERTY_CASES: u64 = 10_000;

fn crossover_preserves_formula() -> Outcome {
    let mut failures = 0;
    for seed in 0..PROPERTY_CASES {
        let mut c = draw_case(seed);
        let n = c.query.len();
        let p1 = random_trace(&mut c.rng, c.k, n);
        let p2 = random_trace(&mut c.rng, c.k, n);
        let sig = signature(&c.formula, &c.s);
        let p_c = c.rng.gen_range(0.0..=1.0);
        let child = constrained_crossover(&p1, &p2, &c.query, &sig, p_c, &mut c.rng).unwrap();
        if child.len() != n || !evaluate(&child, &c.formula, &c.s).unwrap() {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!(
            "{}/{PROPERTY_CASES} offspring satisfy the formula",
            PROPERTY_CASES - failures
        ),
    )
}

fn mutation_preserves_formula() -> Outcome {
    let (mut apriori_fail, mut online_fail) = (0, 0);
    for seed in 0..PROPERTY_CASES {
        let mut c = draw_case(seed + 1_000_000);
        let n = c.query.len();
        let sig = signature(&c.formula, &c.s);
        let dfa = compile(&c.formula, &c.s).unwrap();
        // Start from a crossover child, which is compliant too.
        let p1 = random_trace(&mut c.rng, c.k, n);
        let p2 = random_trace(&mut c.rng, c.k, n);
        let offspring = constrained_crossover(&p1, &p2, &c.query, &sig, 0.5, &mut c.rng).unwrap();
        let offspring = if evaluate(&offspring, &c.formula, &c.s).unwrap() {
            offspring
        } else {
            c.query.clone()
        };
        let domains = random_domains(&mut c.rng, c.k, n);
        let p_mut = c.rng.gen_range(0.0..=1.0);
        let a = mutate(
            &offspring,
            Mutation::APriori(&sig),
            &domains,
            p_mut,
            &mut c.rng,
        )
        .unwrap();
        if a.len() != n || !evaluate(&a, &c.formula, &c.s).unwrap() {
            apriori_fail += 1;
        }
        let o = mutate(
            &offspring,
            Mutation::Online(&dfa),
            &domains,
            p_mut,
            &mut c.rng,
        )
        .unwrap();
        if o.len() != n || !evaluate(&o, &c.formula, &c.s).unwrap() {
            online_fail += 1;
        }
    }
    outcome(
        apriori_fail + online_fail == 0,
        format!(
            "APriori {}/{PROPERTY_CASES}, Online {}/{PROPERTY_CASES} mutants satisfy the formula",
            PROPERTY_CASES - apriori_fail,
            PROPERTY_CASES - online_fail
        ),
    )
}

fn all_traces(k: usize, max_len: usize) -> Vec<Trace> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Activity>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|t| {
                (0..k).map(move |a| {
                    let mut t = t.clone();
                    t.push(Activity::new(a));
                    t
                })
            })
            .collect();
        out.extend(layer.iter().map(|t| Trace::new(t.clone()).unwrap()));
    }
    out
}

fn compiler_matches_semantics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let universes: Vec<Vec<Trace>> = (0..=4).map(|k| all_traces(k, 6)).collect();
    let (mut checked, mut disagreements) = (0usize, 0usize);
    for _ in 0..200 {
        let k = rng.gen_range(1..=4);
        let s = alphabet(k);
        let f = random_formula(&mut rng, k, 4);
        let dfa = compile(&f, &s).unwrap();
        for t in &universes[k] {
            checked += 1;
            if dfa.accepts(t).unwrap() != evaluate(t, &f, &s).unwrap() {
                disagreements += 1;
            }
        }
    }
    outcome(
        disagreements == 0,
        format!("200 formulas, {checked} trace checks, {disagreements} disagreements"),
    )
}

fn golden_automaton() -> Outcome {
    let s = Alphabet::new([
        "apply", "aut_chk", "man_chk", "phone", "ok", "offer", "book", "send_doc", "sms", "email",
    ])
    .unwrap();
    let f = parse_formula("(!man_chk) U aut_chk", &s).unwrap();
    let dfa = compile(&f, &s).unwrap().minimize();
    let accepting = dfa.accepting_states();
    let absorbing = accepting.len() == 1
        && s.activities()
            .all(|a| dfa.next(accepting[0], a) == accepting[0]);
    outcome(
        dfa.num_states() == 3 && accepting.len() == 1 && absorbing,
        format!(
            "{} states, {} accepting, accepting state absorbing: {absorbing}",
            dfa.num_states(),
            accepting.len()
        ),
    )
}

fn bench_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../bench")
}

fn claim_benchmark() -> Vec<Cell> {
    let log = generate_claim_log(42, 4800);
    let formulas = ["claims_10", "claims_25", "claims_50"]
        .iter()
        .map(|id| {
            let path = bench_dir().join(format!("formulas/{id}.ltl"));
            let text = std::fs::read_to_string(&path).unwrap();
            BenchFormula {
                id: id.to_string(),
                formula: parse_formula(&text, &log.alphabet).unwrap(),
            }
        })
        .collect();
    let plan = BenchPlan {
        strategies: Strategy::ALL.to_vec(),
        formulas,
        prefixes: vec![10],
        queries: 15,
        seed: 42,
        ga: GaConfig {
            t: 5,
            ..GaConfig::default()
        },
        hyper: Hyper::default(),
        timing: false,
    };
    run_bench(&log, &plan).unwrap()
}

fn constrained(cells: &[Cell]) -> impl Iterator<Item = &Cell> {
    cells.iter().filter(|c| c.row.strategy.is_constrained())
}

fn benchmark_compliance(cells: &[Cell]) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for c in constrained(cells) {
        let ok = c.row.compliance == Some(1.0) && c.row.failures == 0 && c.row.queries == 15;
        pass &= ok;
        parts.push(format!(
            "{}/{}={}",
            c.row.strategy,
            c.row.formula_id,
            c.row.compliance.map_or("none".into(), |v| format!("{v}"))
        ));
    }
    outcome(pass, parts.join(" "))
}

fn benchmark_hit_rate(cells: &[Cell]) -> Outcome {
    let rates: Vec<f64> = constrained(cells)
        .map(|c| c.row.hit_rate.unwrap_or(0.0))
        .collect();
    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        min >= 0.9,
        format!("minimum hit rate {min:.3} over {} cells", rates.len()),
    )
}

fn benchmark_trend(cells: &[Cell]) -> Outcome {
    let at50 = |s: Strategy| {
        cells
            .iter()
            .find(|c| c.row.formula_id == "claims_50" && c.row.strategy == s)
            .map(|c| c.row.clone())
            .unwrap()
    };
    let apriori = at50(Strategy::APriori).sparsity.unwrap_or(f64::INFINITY);
    let genphi = at50(Strategy::GenPhi).sparsity.unwrap_or(0.0);
    let gen = at50(Strategy::Gen).compliance.unwrap_or(1.0);
    let constrained_min = [Strategy::Mar, Strategy::APriori, Strategy::Online]
        .iter()
        .map(|&s| at50(s).compliance.unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    outcome(
        apriori <= genphi && gen <= constrained_min,
        format!(
            "sparsity APriori {apriori:.4} <= GenPhi {genphi:.4}; compliance Gen {gen:.4} <= constrained {constrained_min:.4}"
        ),
    )
}

fn metric_identities() -> Outcome {
    let s = Alphabet::new([
        "apply", "aut_chk", "man_chk", "phone", "ok", "offer", "book", "send_doc", "sms", "email",
    ])
    .unwrap();
    let t = |names: &str| Trace::from_names(&s, &names.split(',').collect::<Vec<_>>()).unwrap();
    let tau1 = t("apply,aut_chk,man_chk,phone,ok,offer,phone,book");
    let c2 = t("apply,aut_chk,man_chk,phone,ok,offer,phone,send_doc");
    let d = distance(&tau1, &c2).unwrap();
    let sp = sparsity(&tau1, &c2).unwrap();
    let m = CandidateMetrics {
        validity: 0,
        distance: 0.125,
        sparsity: 1,
        implausibility: 0.2,
        compliance: 1,
    };
    let f = m.fitness(&FitnessWeights::default());
    outcome(
        (d - 0.125).abs() < 1e-12 && sp == 1 && (f - 0.6625).abs() < 1e-12,
        format!("distance {d}, sparsity {sp}, fitness {f}"),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tempocf"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn explain_is_deterministic() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::copy(bench_dir().join("formulas/claims_10.ltl"), p.join("f.ltl")).unwrap();
    let steps: [&[&str]; 2] = [
        &[
            "gen-log",
            "--seed",
            "42",
            "--cases",
            "4800",
            "--out",
            "claims.csv",
        ],
        &[
            "train",
            "--log",
            "claims.csv",
            "--prefix",
            "10",
            "--out",
            "model.json",
        ],
    ];
    for step in steps {
        if !run_cli(p, step).status.success() {
            return outcome(false, format!("`{}` failed", step.join(" ")));
        }
    }
    let log = read_csv_log(p.join("claims.csv"), &CsvOptions::default()).unwrap();
    let f = parse_formula(
        &std::fs::read_to_string(p.join("f.ltl")).unwrap(),
        &log.alphabet,
    )
    .unwrap();
    let case = log
        .cases
        .iter()
        .rev()
        .find(|c| {
            c.trace
                .prefix(10)
                .is_some_and(|q| evaluate(&q, &f, &log.alphabet).unwrap())
        })
        .unwrap();
    let mut outputs = Vec::new();
    for out in ["a.json", "b.json"] {
        let r = run_cli(
            p,
            &[
                "explain",
                "--log",
                "claims.csv",
                "--model",
                "model.json",
                "--formula",
                "f.ltl",
                "--case",
                &case.case_id,
                "--strategy",
                "Online",
                "--t",
                "5",
                "--seed",
                "42",
                "--out",
                out,
            ],
        );
        if !r.status.success() {
            return outcome(false, String::from_utf8_lossy(&r.stderr).into_owned());
        }
        outputs.push(std::fs::read(p.join(out)).unwrap());
    }
    outcome(
        outputs[0] == outputs[1] && !outputs[0].is_empty(),
        format!(
            "two runs on {}, {} bytes each",
            case.case_id,
            outputs[0].len()
        ),
    )
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.gen_range(3..12);
        let m = rng.gen_range(1..15);
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let samples: Vec<Vec<usize>> = (0..m)
            .map(|_| (0..d - 1).filter(|_| rng.gen_bool(0.4)).collect())
            .collect();
        let labels: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.5)).collect();
        let l2 = rng.gen_range(0.0..0.1);
        let (_, analytic) = loss_and_gradient(&w, &samples, &labels, l2);
        let h = 1e-6;
        let numeric: Vec<f64> = (0..d)
            .map(|j| {
                let mut up = w.clone();
                let mut down = w.clone();
                up[j] += h;
                down[j] -= h;
                (loss_and_gradient(&up, &samples, &labels, l2).0
                    - loss_and_gradient(&down, &samples, &labels, l2).0)
                    / (2.0 * h)
            })
            .collect();
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt()
            + numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
        worst = worst.max(diff / norm.max(1e-12));
    }
    outcome(
        worst < 1e-5,
        format!("worst relative error {worst:.2e} over 20 instances"),
    )
}

fn main() {
    let mut all_pass = true;
    let mut report = |id: u32, name: &str, run: &dyn Fn() -> Outcome| {
        let started = Instant::now();
        let o = run();
        all_pass &= o.pass;
        println!(
            "{} {id:>2} {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            started.elapsed().as_secs_f64()
        );
    };
    report(
        1,
        "constrained crossover keeps compliance",
        &crossover_preserves_formula,
    );
    report(
        2,
        "constrained mutation keeps compliance",
        &mutation_preserves_formula,
    );
    report(
        3,
        "compiled automata agree with the semantics",
        &compiler_matches_semantics,
    );
    report(4, "golden automaton shape", &golden_automaton);
    let started = Instant::now();
    let cells = claim_benchmark();
    println!(
        "     claim benchmark finished in {:.1}s",
        started.elapsed().as_secs_f64()
    );
    report(5, "benchmark compliance of constrained strategies", &|| {
        benchmark_compliance(&cells)
    });
    report(6, "benchmark hit rate", &|| benchmark_hit_rate(&cells));
    report(
        7,
        "sparsity and compliance trend at the widest formula",
        &|| benchmark_trend(&cells),
    );
    report(8, "metric identities", &metric_identities);
    report(
        9,
        "explain output is reproducible",
        &explain_is_deterministic,
    );
    report(10, "linear classifier gradient", &gradient_check);
    if !all_pass {
        std::process::exit(1);
    }
}
