use std::collections::BTreeMap;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::{json, Value};

use semistatic::model::Violation;
use semistatic::Error;

pub const EXIT_FAILS: u8 = 3;
pub const EXIT_INPUT: u8 = 4;
pub const EXIT_SOUNDNESS: u8 = 5;

/// The JSON document printed on standard output. Field order is fixed and
/// maps are sorted, so equal inputs print identical bytes.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub verdict: String,
    pub values: BTreeMap<&'static str, Value>,
    pub certificates: BTreeMap<&'static str, Value>,
    pub diagnostics: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, verdict: impl Into<String>) -> Self {
        Report {
            command,
            verdict: verdict.into(),
            values: BTreeMap::new(),
            certificates: BTreeMap::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn value(mut self, key: &'static str, v: impl Serialize) -> Self {
        self.values.insert(key, to_value(v));
        self
    }

    pub fn certificate(mut self, key: &'static str, v: impl Serialize) -> Self {
        self.certificates.insert(key, to_value(v));
        self
    }

    pub fn note(mut self, msg: impl Into<String>) -> Self {
        self.diagnostics.push(msg.into());
        self
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

type Replay = Box<dyn FnOnce() -> Result<(), String>>;

/// A finished command: its report, exit code and the replays `--verify` runs.
pub struct Outcome {
    pub report: Report,
    pub exit: u8,
    /// Error document for standard error when the condition fails.
    pub error: Option<Value>,
    pub replays: Vec<Replay>,
}

impl Outcome {
    pub fn holds(report: Report) -> Self {
        Outcome { report, exit: 0, error: None, replays: Vec::new() }
    }

    pub fn fails(report: Report) -> Self {
        Outcome { report, exit: EXIT_FAILS, error: None, replays: Vec::new() }
    }

    pub fn with_error(mut self, e: &Error) -> Self {
        self.error = Some(error_document("conditionFails", &e.to_string(), &[]));
        self
    }

    pub fn replay(mut self, check: impl FnOnce() -> Result<(), String> + 'static) -> Self {
        self.replays.push(Box::new(check));
        self
    }

    pub fn emit(self, pretty: bool, verify: bool) -> ExitCode {
        if verify {
            for check in self.replays {
                if let Err(msg) = check() {
                    return Failure::soundness(format!("certificate replay failed: {msg}")).emit();
                }
            }
        }
        let text = if pretty {
            serde_json::to_string_pretty(&self.report)
        } else {
            serde_json::to_string(&self.report)
        };
        println!("{}", text.expect("reports serialize"));
        if let Some(err) = self.error {
            eprintln!("{err}");
        }
        ExitCode::from(self.exit)
    }
}

fn error_document(kind: &str, message: &str, violations: &[Violation]) -> Value {
    json!({
        "error": {
            "kind": kind,
            "message": message,
            "violations": violations,
        }
    })
}

/// A command that produced no report.
#[derive(Debug)]
pub struct Failure {
    exit: u8,
    document: Value,
}

impl Failure {
    pub fn input(path: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        let v = Violation { path: path.into(), message: message.clone() };
        Failure { exit: EXIT_INPUT, document: error_document("invalidInput", &message, &[v]) }
    }

    pub fn soundness(message: String) -> Self {
        Failure { exit: EXIT_SOUNDNESS, document: error_document("soundness", &message, &[]) }
    }

    pub fn emit(self) -> ExitCode {
        eprintln!("{}", self.document);
        ExitCode::from(self.exit)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match &e {
            Error::Parse(rep) | Error::InvalidMarket(rep) => Failure {
                exit: EXIT_INPUT,
                document: error_document("invalidInput", &message, &rep.violations),
            },
            Error::Dimension(_) | Error::Domain(_) => Failure {
                exit: EXIT_INPUT,
                document: error_document("invalidInput", &message, &[]),
            },
            Error::Precondition(_) | Error::RobustArbitrage { .. } | Error::NoConsistentMeasure(_) => Failure {
                exit: EXIT_FAILS,
                document: error_document("conditionFails", &message, &[]),
            },
            Error::Soundness(_) | Error::OracleRefused(_) => Failure {
                exit: EXIT_SOUNDNESS,
                document: error_document("soundness", &message, &[]),
            },
        }
    }
}
