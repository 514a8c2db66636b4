use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempocf_core::automata::{compile_with, CompileOptions};
use tempocf_core::engine::{generate, Strategy};
use tempocf_core::log::{
    generate_claim_log, read_csv_log, write_csv_log, CsvOptions, EventLog, Trace,
};
use tempocf_core::ltl::{evaluate, parse_formula, Alphabet, Formula};
use tempocf_core::metrics::MetricsReport;
use tempocf_core::model::{train_linear, Classifier, TrainedModel};

use crate::bench::{run_bench, write_csv, BenchFormula, BenchPlan};
use crate::config::{ga_config, hyper, KeyValues, GA_KEYS, HYPER_KEYS};
use crate::{BenchArgs, CheckArgs, CliError, CompileArgs, ExplainArgs, GenLogArgs, TrainArgs};

fn read_formula(path: &Path, alphabet: &Alphabet) -> Result<Formula, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_formula(&text, alphabet).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_log(path: &Path, options: &CsvOptions) -> Result<EventLog, CliError> {
    read_csv_log(path, options).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&PathBuf>) -> Result<(KeyValues, PathBuf), CliError> {
    match path {
        Some(p) => Ok((
            KeyValues::load(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        )),
        None => Ok((KeyValues::default(), PathBuf::new())),
    }
}

/// Resolves a path taken from a config file against the file's directory.
fn config_path(base: &Path, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

pub fn compile(args: &CompileArgs) -> Result<(), CliError> {
    let alphabet = match (&args.log, &args.alphabet) {
        (Some(log), _) => read_log(log, &CsvOptions::default())?.alphabet,
        (None, Some(names)) => Alphabet::new(names.iter().map(|s| s.trim()))?,
        (None, None) => {
            return Err(CliError::Input(
                "an alphabet is required: pass --log or --alphabet".into(),
            ))
        }
    };
    let formula = read_formula(&args.formula, &alphabet)?;
    let options = CompileOptions {
        minimize: !args.no_minimize,
        ..Default::default()
    };
    let dfa = compile_with(&formula, &alphabet, &options)?;
    println!(
        "states: {}, accepting: {}",
        dfa.num_states(),
        dfa.accepting_states().len()
    );
    if let Some(out) = &args.dot {
        fs::write(out, dfa.export_dot())?;
    }
    Ok(())
}

pub fn check(args: &CheckArgs) -> Result<(), CliError> {
    let mut log = read_log(&args.log, &CsvOptions::default())?;
    let formula = read_formula(&args.formula, &log.alphabet)?;
    if let Some(n) = args.prefix {
        log = log.prefixes(n);
        if log.is_empty() {
            return Err(CliError::Input(format!("no case has at least {n} events")));
        }
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut compliant = 0usize;
    for case in &log.cases {
        let ok = evaluate(&case.trace, &formula, &log.alphabet)?;
        compliant += usize::from(ok);
        if !args.quiet {
            writeln!(out, "{},{}", case.case_id, u8::from(ok))?;
        }
    }
    writeln!(
        out,
        "compliance: {} ({compliant}/{})",
        compliant as f64 / log.len() as f64,
        log.len()
    )?;
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    let (kv, _) = load_config(args.config.as_ref())?;
    let mut known = vec!["prefix_length", "seed"];
    known.extend(HYPER_KEYS);
    kv.check_keys(&known)?;
    let mut h = hyper(&kv)?;
    if let Some(e) = args.epochs {
        h.epochs = e;
    }
    if let Some(r) = args.learning_rate {
        h.learning_rate = r;
    }
    if let Some(s) = args.seed {
        h.seed = s;
    }
    let n = match args.prefix {
        Some(n) => n,
        None => kv
            .parsed("prefix_length")?
            .ok_or_else(|| CliError::Input("--prefix is required".into()))?,
    };
    let log = read_log(&args.log, &CsvOptions::default())?;
    let model = train_linear(&log, n, &h)?;
    model.save(&args.out)?;
    if let Some(r) = &model.report {
        let show = |a: Option<f64>| a.map_or("n/a".to_string(), |a| format!("{a:.4}"));
        println!(
            "cases: {} train, {} validation, {} test",
            r.train_cases, r.validation_cases, r.test_cases
        );
        println!("train accuracy: {:.4}", r.train_accuracy);
        println!("validation accuracy: {}", show(r.validation_accuracy));
        println!("test accuracy: {}", show(r.test_accuracy));
    }
    Ok(())
}

fn report_table(report: &MetricsReport) -> String {
    let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    let mut s = String::new();
    let rows = [
        ("candidates", report.candidates.len().to_string()),
        ("validity", show(report.validity)),
        ("distance", show(report.distance)),
        ("sparsity", show(report.sparsity)),
        ("implausibility", show(report.implausibility)),
        ("compliance", show(report.compliance)),
        ("diversity", format!("{:.4}", report.diversity)),
        ("hit_rate", format!("{:.4}", report.hit_rate)),
        ("runtime_seconds", show(report.runtime_seconds)),
    ];
    for (k, v) in rows {
        s.push_str(&format!("{k:<16} {v}\n"));
    }
    s
}

pub fn explain(args: &ExplainArgs) -> Result<(), CliError> {
    let (mut kv, base) = load_config(args.config.as_ref())?;
    let mut known: Vec<&str> = GA_KEYS.to_vec();
    known.extend(["log", "model", "formula", "case", "trace", "desired", "out"]);
    kv.check_keys(&known)?;
    if let Some(s) = &args.strategy {
        kv.set("strategy", s);
    }
    if let Some(t) = args.t {
        kv.set("t", t);
    }
    if let Some(s) = args.seed {
        kv.set("seed", s);
    }
    let config = ga_config(&kv)?;
    let path = |flag: &Option<PathBuf>, key: &str| -> Result<PathBuf, CliError> {
        flag.clone()
            .or_else(|| kv.get(key).map(|v| config_path(&base, v)))
            .ok_or_else(|| CliError::Input(format!("--{key} is required")))
    };
    let model = TrainedModel::load(path(&args.model, "model")?)?;
    let log = read_log(
        &path(&args.log, "log")?,
        &CsvOptions::with_alphabet(model.alphabet.clone()),
    )?;
    if log.alphabet.len() != model.alphabet.len() {
        return Err(CliError::Input(
            "the log uses activities the model was not trained on".into(),
        ));
    }
    let formula = read_formula(&path(&args.formula, "formula")?, &log.alphabet)?;

    let n = model.prefix_length;
    let case = args
        .case
        .clone()
        .or_else(|| kv.get("case").map(String::from));
    let literal = args
        .trace
        .clone()
        .or_else(|| kv.get("trace").map(String::from));
    let query = match (case, literal) {
        (Some(id), _) => {
            let c = log
                .case(&id)
                .ok_or_else(|| CliError::Input(format!("no case `{id}` in the log")))?;
            c.trace
                .prefix(n)
                .ok_or_else(|| CliError::Input(format!("case `{id}` has fewer than {n} events")))?
        }
        (None, Some(text)) => {
            let names: Vec<&str> = text.split(',').map(str::trim).collect();
            Trace::from_names(&log.alphabet, &names)?
        }
        (None, None) => return Err(CliError::Input("pass --case or --trace".into())),
    };
    let desired = match args.desired {
        Some(d) => d,
        None => match kv.parsed::<bool>("desired")? {
            Some(d) => d,
            None => !model.predict(&query)?,
        },
    };
    let timing = args.timing || kv.parsed::<bool>("timing")?.unwrap_or(false);

    let set = generate(&query, desired, &formula, &log, &model, &config)?;
    let doc = set.document(&log.alphabet, timing);
    let json = serde_json::to_string_pretty(&doc)?;
    let table = report_table(&doc.report);
    match args
        .out
        .clone()
        .or_else(|| kv.get("out").map(|v| config_path(&base, v)))
    {
        Some(out) => {
            fs::write(&out, json + "\n")?;
            print!("{table}");
        }
        None => {
            println!("{json}");
            eprint!("{table}");
        }
    }
    Ok(())
}

const BENCH_KEYS: [&str; 7] = [
    "log",
    "synthetic_seed",
    "synthetic_cases",
    "formula",
    "strategies",
    "prefixes",
    "queries",
];

fn list<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| CliError::Input(format!("`{key}`: cannot parse `{s}`: {e}")))
        })
        .collect()
}

pub fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let (mut kv, base) = load_config(Some(&args.config))?;
    let mut known: Vec<&str> = GA_KEYS.to_vec();
    known.extend(HYPER_KEYS);
    known.extend(BENCH_KEYS);
    kv.check_keys(&known)?;
    if let Some(s) = args.seed {
        kv.set("seed", s);
    }
    let log = match args
        .log
        .clone()
        .or_else(|| kv.get("log").map(|v| config_path(&base, v)))
    {
        Some(p) => read_log(&p, &CsvOptions::default())?,
        None => generate_claim_log(
            kv.parsed("synthetic_seed")?.unwrap_or(42),
            kv.parsed("synthetic_cases")?.unwrap_or(4800),
        ),
    };
    let mut formulas = Vec::new();
    for entry in kv.all("formula") {
        let (id, file) = entry.split_once(':').ok_or_else(|| {
            CliError::Input(format!("`formula = {entry}`: expected `label : path`"))
        })?;
        formulas.push(BenchFormula {
            id: id.trim().to_string(),
            formula: read_formula(&config_path(&base, file.trim()), &log.alphabet)?,
        });
    }
    if formulas.is_empty() {
        return Err(CliError::Input("the grid lists no `formula`".into()));
    }
    let plan = BenchPlan {
        strategies: match kv.get("strategies") {
            Some(v) => list::<Strategy>(v, "strategies")?,
            None => Strategy::ALL.to_vec(),
        },
        formulas,
        prefixes: match kv.get("prefixes") {
            Some(v) => list(v, "prefixes")?,
            None => vec![10],
        },
        queries: kv.parsed("queries")?.unwrap_or(15),
        seed: kv.parsed("seed")?.unwrap_or(0),
        ga: ga_config(&kv)?,
        hyper: hyper(&kv)?,
        timing: args.timing || kv.parsed::<bool>("timing")?.unwrap_or(false),
    };
    let cells = run_bench(&log, &plan)?;
    for c in &cells {
        for r in &c.runs {
            if let Err(e) = &r.result {
                log::warn!(
                    "{} / {} / {}: {}: {e}",
                    c.row.strategy,
                    c.row.formula_id,
                    c.row.prefix,
                    r.query.display(&log.alphabet)
                );
            }
        }
    }
    match &args.out {
        Some(p) => write_csv(&cells, fs::File::create(p)?)?,
        None => write_csv(&cells, std::io::stdout().lock())?,
    }
    Ok(())
}

pub fn gen_log(args: &GenLogArgs) -> Result<(), CliError> {
    let log = generate_claim_log(args.seed, args.cases);
    write_csv_log(&log, &args.out)?;
    println!(
        "cases: {}, activities: {}, mean length: {:.2}, positive rate: {:.3}",
        log.len(),
        log.alphabet.len(),
        log.mean_length(),
        log.positive_rate()
    );
    Ok(())
}
