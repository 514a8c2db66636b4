//! Predictor running in a child process.
//!
//! Requests and responses are newline-delimited JSON objects on the child's
//! stdin and stdout:
//!
//! ```text
//! -> {"id": 7, "trace": ["register", "task_1"]}
//! <- {"id": 7, "score": 0.83}
//! ```
//!
//! Responses may come back in any order. A whole batch is written before any
//! response is awaited, and stdout is drained by a reader thread so large
//! batches cannot deadlock on full pipes.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::log::Trace;
use crate::ltl::Alphabet;

use super::{check_length, Classifier, ModelError};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    trace: Vec<&'a str>,
}

#[derive(Deserialize)]
struct Response {
    id: u64,
    score: f64,
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
}

pub struct ExternalClassifier {
    command: String,
    alphabet: Alphabet,
    prefix_length: Option<usize>,
    timeout: Duration,
    process: Mutex<Process>,
}

impl std::fmt::Debug for ExternalClassifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalClassifier")
            .field("command", &self.command)
            .field("prefix_length", &self.prefix_length)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl ExternalClassifier {
    /// Starts `command` through `sh -c`.
    pub fn spawn(command: &str, alphabet: &Alphabet) -> Result<Self, ModelError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ModelError::Spawn {
                command: command.to_string(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ExternalClassifier {
            command: command.to_string(),
            alphabet: alphabet.clone(),
            prefix_length: None,
            timeout: DEFAULT_TIMEOUT,
            process: Mutex::new(Process {
                child,
                stdin,
                lines,
                next_id: 0,
            }),
        })
    }

    pub fn with_prefix_length(mut self, n: usize) -> Self {
        self.prefix_length = Some(n);
        self
    }

    /// Per-batch deadline.
    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl Classifier for ExternalClassifier {
    fn prefix_length(&self) -> Option<usize> {
        self.prefix_length
    }

    fn score(&self, trace: &Trace) -> Result<f64, ModelError> {
        Ok(self.score_batch(std::slice::from_ref(trace))?[0])
    }

    fn score_batch(&self, traces: &[Trace]) -> Result<Vec<f64>, ModelError> {
        for t in traces {
            check_length(self.prefix_length, t)?;
            if let Some(a) = t.iter().find(|&a| !self.alphabet.contains(a)) {
                return Err(ModelError::AlphabetMismatch(a.index()));
            }
        }
        let mut p = self.process.lock().unwrap_or_else(|e| e.into_inner());
        let first = p.next_id;
        p.next_id += traces.len() as u64;

        let mut buf = Vec::new();
        for (k, t) in traces.iter().enumerate() {
            let req = Request {
                id: first + k as u64,
                trace: t.names(&self.alphabet),
            };
            serde_json::to_writer(&mut buf, &req)?;
            buf.push(b'\n');
        }
        p.stdin.write_all(&buf)?;
        p.stdin.flush()?;

        let mut scores: HashMap<u64, f64> = HashMap::with_capacity(traces.len());
        let deadline = Instant::now() + self.timeout;
        while scores.len() < traces.len() {
            let left = deadline.saturating_duration_since(Instant::now());
            let line = match p.lines.recv_timeout(left) {
                Ok(line) => line?,
                Err(RecvTimeoutError::Timeout) => return Err(ModelError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(ModelError::Protocol("predictor closed its output".into()))
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let resp: Response = serde_json::from_str(&line)
                .map_err(|e| ModelError::Protocol(format!("bad response `{line}`: {e}")))?;
            if resp.id < first || resp.id >= first + traces.len() as u64 {
                return Err(ModelError::Protocol(format!("unexpected id {}", resp.id)));
            }
            if !(0.0..=1.0).contains(&resp.score) {
                return Err(ModelError::Protocol(format!(
                    "score {} outside [0, 1]",
                    resp.score
                )));
            }
            if scores.insert(resp.id, resp.score).is_some() {
                return Err(ModelError::Protocol(format!("duplicate id {}", resp.id)));
            }
        }
        Ok((0..traces.len() as u64)
            .map(|k| scores[&(first + k)])
            .collect())
    }
}

impl Drop for ExternalClassifier {
    fn drop(&mut self) {
        let p = self.process.get_mut().unwrap_or_else(|e| e.into_inner());
        let _ = p.child.kill();
        let _ = p.child.wait();
    }
}
