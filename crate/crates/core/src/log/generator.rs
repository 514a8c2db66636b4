//! Synthetic claim-management log.
//!
//! A small stochastic control-flow model: every claim is registered, may
//! receive a questionnaire and a high-insurance check, is decided (through the
//! hospital when one was contacted), and ends with a notification. Filler
//! tasks are interleaved between the stages. Each claim carries a hidden
//! merit flag that biases both the filler tasks it shows and its decision, so
//! that outcomes are predictable from the early part of a trace.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ltl::{parse_formula, Activity, Alphabet, Formula};

use super::{EventLog, LabeledCase, Trace};

pub const CLAIM_ACTIVITIES: [&str; 16] = [
    "register",
    "createquestionnaire",
    "highinsurancecheck",
    "contacthospital",
    "acceptclaim",
    "rejectclaim",
    "preparenotificationcontent",
    "sendnotificationbyphone",
    "sendnotificationbypost",
    "task_1",
    "task_2",
    "task_3",
    "task_4",
    "task_5",
    "task_6",
    "task_7",
];

const P_MERIT: f64 = 0.5;
const P_QUESTIONNAIRE: f64 = 0.55;
const P_HIGH_CHECK: f64 = 0.5;
const P_HOSPITAL_AFTER_CHECK: f64 = 0.7;
const P_ACCEPT_MERIT: f64 = 0.85;
const P_ACCEPT_NO_MERIT: f64 = 0.15;
/// Probability that a filler task is drawn from the claim's evidence group.
const P_EVIDENCE: f64 = 0.75;

const MERIT_TASKS: [&str; 3] = ["task_1", "task_2", "task_3"];
const NO_MERIT_TASKS: [&str; 3] = ["task_5", "task_6", "task_7"];
const ALL_TASKS: [&str; 7] = [
    "task_1", "task_2", "task_3", "task_4", "task_5", "task_6", "task_7",
];

/// The constraint every generated (complete) trace satisfies:
/// `G(contacthospital -> X(acceptclaim | rejectclaim))`.
pub fn claim_constraint(alphabet: &Alphabet) -> Formula {
    parse_formula(
        "G (contacthospital -> X (acceptclaim | rejectclaim))",
        alphabet,
    )
    .expect("claim alphabet contains the constraint's activities")
}

struct CaseBuilder<'a> {
    alphabet: &'a Alphabet,
    events: Vec<Activity>,
}

impl CaseBuilder<'_> {
    fn push(&mut self, name: &str) {
        self.events
            .push(self.alphabet.get(name).expect("claim activity"));
    }

    fn fillers(&mut self, rng: &mut ChaCha8Rng, count: usize, merit: bool) {
        let evidence = if merit { &MERIT_TASKS } else { &NO_MERIT_TASKS };
        for _ in 0..count {
            let name = if rng.gen_bool(P_EVIDENCE) {
                evidence.choose(rng)
            } else {
                ALL_TASKS.choose(rng)
            };
            self.push(name.expect("nonempty task group"));
        }
    }
}

/// Generates `num_cases` claims deterministically from `seed`. The label is
/// true iff the trace contains `acceptclaim`.
pub fn generate_claim_log(seed: u64, num_cases: usize) -> EventLog {
    let alphabet = Alphabet::new(CLAIM_ACTIVITIES).expect("valid claim alphabet");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let accept = alphabet.get("acceptclaim").expect("claim activity");
    let width = num_cases.max(1).to_string().len().max(5);

    let mut cases = Vec::with_capacity(num_cases);
    for k in 0..num_cases {
        let merit = rng.gen_bool(P_MERIT);
        let mut b = CaseBuilder {
            alphabet: &alphabet,
            events: Vec::with_capacity(16),
        };
        b.push("register");
        let n = rng.gen_range(1..=4);
        b.fillers(&mut rng, n, merit);
        if rng.gen_bool(P_QUESTIONNAIRE) {
            b.push("createquestionnaire");
        }
        let n = rng.gen_range(1..=2);
        b.fillers(&mut rng, n, merit);
        let mut hospital = false;
        if rng.gen_bool(P_HIGH_CHECK) {
            b.push("highinsurancecheck");
            hospital = rng.gen_bool(P_HOSPITAL_AFTER_CHECK);
        }
        let n = rng.gen_range(0..=1);
        b.fillers(&mut rng, n, merit);
        let p_accept = if merit {
            P_ACCEPT_MERIT
        } else {
            P_ACCEPT_NO_MERIT
        };
        if hospital {
            b.push("contacthospital");
        }
        if rng.gen_bool(p_accept) {
            b.push("acceptclaim");
        } else {
            b.push("rejectclaim");
        }
        let n = rng.gen_range(0..=1);
        b.fillers(&mut rng, n, merit);
        b.push("preparenotificationcontent");
        if rng.gen_bool(0.5) {
            b.push("sendnotificationbyphone");
        } else {
            b.push("sendnotificationbypost");
        }
        let n = rng.gen_range(0..=1);
        b.fillers(&mut rng, n, merit);

        let trace = Trace::new(b.events).expect("register is always present");
        let label = trace.iter().any(|a| a == accept);
        cases.push(LabeledCase {
            case_id: format!("claim_{:0width$}", k + 1, width = width),
            trace,
            label,
        });
    }
    EventLog::new(alphabet, cases).expect("generated log is well formed")
}
