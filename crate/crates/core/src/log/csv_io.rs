//! Minimal CSV contract: `case_id,position,activity,label`, one row per
//! event, `position` 1-based and contiguous within a case, `label` either
//! `true` or `false` and identical across a case's rows.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::ltl::Alphabet;

use super::{EventLog, LabeledCase, LogError, Trace};

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    /// Pins activity ids. Names missing from it are appended in
    /// first-appearance order.
    pub alphabet: Option<Alphabet>,
}

impl CsvOptions {
    pub fn with_alphabet(alphabet: Alphabet) -> Self {
        CsvOptions {
            alphabet: Some(alphabet),
        }
    }
}

pub fn read_csv_log(path: impl AsRef<Path>, options: &CsvOptions) -> Result<EventLog, LogError> {
    read_csv_from(File::open(path)?, options)
}

struct PendingCase {
    id: String,
    label: bool,
    events: Vec<(usize, crate::ltl::Activity)>,
}

pub fn read_csv_from<R: Read>(reader: R, options: &CsvOptions) -> Result<EventLog, LogError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &'static str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(LogError::MissingColumn(name))
    };
    let (c_case, c_pos, c_act, c_label) = (
        column("case_id")?,
        column("position")?,
        column("activity")?,
        column("label")?,
    );

    let mut alphabet = options.alphabet.clone().unwrap_or_else(Alphabet::empty);
    let mut order: Vec<PendingCase> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let row = k + 2;
        let field = |c: usize| record.get(c).unwrap_or("");
        let case_id = field(c_case);
        if case_id.is_empty() {
            return Err(LogError::EmptyCase(row));
        }
        let position: usize = field(c_pos).parse().map_err(|_| LogError::BadRow {
            row,
            message: format!("invalid position `{}`", field(c_pos)),
        })?;
        let label = match field(c_label) {
            "true" => true,
            "false" => false,
            other => {
                return Err(LogError::BadRow {
                    row,
                    message: format!("invalid label `{other}`"),
                })
            }
        };
        let activity = alphabet.intern(field(c_act))?;

        let slot = *index.entry(case_id.to_string()).or_insert_with(|| {
            order.push(PendingCase {
                id: case_id.to_string(),
                label,
                events: Vec::new(),
            });
            order.len() - 1
        });
        let case = &mut order[slot];
        if case.label != label {
            return Err(LogError::ConflictingLabels(case.id.clone()));
        }
        case.events.push((position, activity));
    }

    let mut cases = Vec::with_capacity(order.len());
    for mut case in order {
        case.events.sort_by_key(|&(p, _)| p);
        for (k, w) in case.events.iter().enumerate() {
            let expected = k + 1;
            if w.0 != expected {
                if k > 0 && case.events[k - 1].0 == w.0 {
                    return Err(LogError::DuplicatePosition {
                        case: case.id,
                        position: w.0,
                    });
                }
                return Err(LogError::NonContiguousPositions {
                    case: case.id,
                    expected,
                    found: w.0,
                });
            }
        }
        let trace = Trace::new(case.events.into_iter().map(|(_, a)| a).collect())?;
        cases.push(LabeledCase {
            case_id: case.id,
            trace,
            label: case.label,
        });
    }
    if cases.is_empty() {
        return Err(LogError::EmptyLog);
    }
    EventLog::new(alphabet, cases)
}

pub fn write_csv_log(log: &EventLog, path: impl AsRef<Path>) -> Result<(), LogError> {
    let file = File::create(path)?;
    write_csv_to(log, std::io::BufWriter::new(file))
}

/// Writes rows sorted by `(case_id, position)`.
pub fn write_csv_to<W: Write>(log: &EventLog, writer: W) -> Result<(), LogError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["case_id", "position", "activity", "label"])?;
    let mut cases: Vec<&LabeledCase> = log.cases.iter().collect();
    cases.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    for case in cases {
        let label = if case.label { "true" } else { "false" };
        for (k, a) in case.trace.iter().enumerate() {
            let position = (k + 1).to_string();
            wtr.write_record([
                case.case_id.as_str(),
                position.as_str(),
                log.alphabet.name(a),
                label,
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
