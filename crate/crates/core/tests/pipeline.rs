//! Log generation, training and search through the public API only.

use tempocf_core::automata::compile;
use tempocf_core::engine::{generate, GaConfig, Strategy};
use tempocf_core::log::{
    claim_constraint, generate_claim_log, read_csv_log, write_csv_log, CsvOptions,
};
use tempocf_core::ltl::{evaluate, parse_formula};
use tempocf_core::model::{train_linear, Classifier, Hyper, TrainedModel};

#[test]
fn claim_log_round_trip_train_and_explain() {
    let log = generate_claim_log(11, 800);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("claims.csv");
    write_csv_log(&log, &path).unwrap();
    let back = read_csv_log(&path, &CsvOptions::with_alphabet(log.alphabet.clone())).unwrap();
    assert_eq!(back, log);

    let phi = claim_constraint(&log.alphabet);
    assert!(log
        .traces()
        .all(|t| evaluate(t, &phi, &log.alphabet).unwrap()));

    let model = train_linear(&log, 9, &Hyper::default()).unwrap();
    let report = model.report.clone().unwrap();
    assert!(report.test_accuracy.unwrap() > 0.8);
    let saved = dir.path().join("model.json");
    model.save(&saved).unwrap();
    let model = TrainedModel::load(&saved).unwrap();

    let dfa = compile(&phi, &log.alphabet).unwrap();
    let query = log
        .traces()
        .filter_map(|t| t.prefix(9))
        .find(|q| dfa.accepts(q).unwrap())
        .unwrap();
    let desired = !model.predict(&query).unwrap();
    for strategy in Strategy::ALL {
        let config = GaConfig {
            strategy,
            seed: 1,
            generations: 25,
            ..GaConfig::default()
        };
        let set = generate(&query, desired, &phi, &log, &model, &config).unwrap();
        let mut traces = set.traces();
        for t in &traces {
            assert_eq!(t.len(), 9);
            assert_eq!(model.predict(t).unwrap(), desired);
            if strategy.is_constrained() {
                assert!(evaluate(t, &phi, &log.alphabet).unwrap());
            }
        }
        traces.sort();
        traces.dedup();
        assert_eq!(traces.len(), set.candidates.len(), "{strategy}: duplicates");
    }
}

#[test]
fn trivial_formula_makes_every_strategy_compliant() {
    let log = generate_claim_log(2, 400);
    let model = train_linear(&log, 7, &Hyper::default()).unwrap();
    let phi = parse_formula("true", &log.alphabet).unwrap();
    let query = log.traces().find_map(|t| t.prefix(7)).unwrap();
    let desired = !model.predict(&query).unwrap();
    let config = GaConfig {
        strategy: Strategy::Gen,
        generations: 20,
        ..GaConfig::default()
    };
    let set = generate(&query, desired, &phi, &log, &model, &config).unwrap();
    assert!(set.report.compliance.is_none_or(|c| c == 1.0));
}
