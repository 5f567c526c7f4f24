//! Report envelope shared by every subcommand.
//!
//! JSON reports have the shape
//! `{"command", "settings", "defaults", "result"}` on success and
//! `{"command", "settings", "defaults", "error": {"kind", "message"}}` on
//! failure. Object keys are sorted, so equal inputs give equal bytes.

use std::io::Write;
use std::process::ExitCode;

use ribbonsum::Error;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub order: usize,
    pub samples: usize,
    pub seed: u64,
    pub q_max: usize,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Config,
}

impl Status {
    pub fn code(self) -> ExitCode {
        ExitCode::from(match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Config => 2,
        })
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::ResourceLimit { .. } => "resource_limit",
        Error::Domain(_) => "domain",
        Error::Degree { .. } => "degree",
        Error::Shape(_) => "shape",
        Error::InvalidGraph(_) => "invalid_graph",
        Error::MissingLabel(_) => "missing_label",
        Error::Scope(_) => "scope",
        Error::Singular(_) => "singular",
        Error::Plan(_) => "plan",
        Error::Evaluation(_) => "evaluation",
        Error::Config(_) => "config",
        Error::Parse(_) => "parse",
    }
}

pub fn error_status(e: &Error) -> Status {
    if e.is_configuration() {
        Status::Config
    } else {
        Status::Fail
    }
}

pub struct Emitter {
    pub json: bool,
    pub command: String,
    pub settings: Settings,
    pub defaults: Settings,
}

impl Emitter {
    fn envelope(&self) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("settings".into(), json!(self.settings));
        m.insert("defaults".into(), json!(self.defaults));
        m
    }

    /// Prints a result. `extra` lines are shown after the fields in text mode only.
    pub fn result(&self, result: Value, extra: &[String]) {
        if self.json {
            let mut m = self.envelope();
            m.insert("result".into(), result);
            emit(&[serde_json::to_string_pretty(&Value::Object(m)).expect("serializable")]);
            return;
        }
        let mut lines = self.header();
        if let Value::Object(fields) = &result {
            lines.extend(fields.iter().map(|(k, v)| format!("{k}: {}", text(v))));
        }
        lines.extend(extra.iter().cloned());
        emit(&lines);
    }

    pub fn error(&self, e: &Error) {
        if self.json {
            let mut m = self.envelope();
            m.insert("error".into(), json!({ "kind": error_kind(e), "message": e.to_string() }));
            emit(&[serde_json::to_string_pretty(&Value::Object(m)).expect("serializable")]);
        } else {
            eprintln!("error: {e}");
        }
    }

    fn header(&self) -> Vec<String> {
        let s = &self.settings;
        let d = &self.defaults;
        let n = s.n.map_or("auto".to_string(), |n| n.to_string());
        vec![
            format!("command: {}", self.command),
            format!(
                "settings: N={n} order={} samples={} seed={} q_max={} step={}",
                s.order, s.samples, s.seed, s.q_max, s.step
            ),
            format!(
                "defaults: order={} samples={} seed={} q_max={} step={}",
                d.order, d.samples, d.seed, d.q_max, d.step
            ),
        ]
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(lines: &[String]) {
    let mut out = std::io::stdout().lock();
    for line in lines {
        if writeln!(out, "{line}").is_err() {
            return;
        }
    }
}

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
