//! Command reports: human-readable text plus a JSON sidecar.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Accepted,
    Rejected,
    Valid,
    Invalid,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Accepted | Status::Valid => 0,
            Status::Rejected | Status::Invalid => 1,
            Status::Error => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Status::Accepted => "accepted",
            Status::Rejected => "rejected",
            Status::Valid => "valid",
            Status::Invalid => "invalid",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    State(String),
    Path(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Detail {
    pub location: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub details: Vec<Detail>,
    /// Sizes and counts; `wall_ms` is the only non-deterministic entry.
    pub stats: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            status: Status::Accepted,
            details: Vec::new(),
            stats: BTreeMap::new(),
        }
    }

    pub fn error(command: &str, err: &anyhow::Error) -> Self {
        let mut r = Report::new(command);
        r.status = Status::Error;
        r.note("input", format!("{err:#}"));
        r
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn note(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.details.push(Detail {
            location: location.into(),
            message: message.into(),
            witness: None,
        });
    }

    pub fn fail(&mut self, location: impl Into<String>, message: impl Into<String>, witness: Option<Witness>) {
        self.details.push(Detail {
            location: location.into(),
            message: message.into(),
            witness,
        });
    }

    pub fn stat(&mut self, key: &str, v: impl Into<Value>) {
        self.stats.insert(key.into(), v.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The JSON form without `wall_ms`, for byte-for-byte comparisons.
    pub fn to_stable_json(&self) -> String {
        let mut r = self.clone();
        r.stats.remove("wall_ms");
        r.to_json()
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}: {}", self.command, self.status.name());
        for d in &self.details {
            let _ = write!(s, "  {}: {}", d.location, d.message);
            match &d.witness {
                Some(Witness::State(st)) => {
                    let _ = write!(s, " [witness {st}]");
                }
                Some(Witness::Path(p)) => {
                    let _ = write!(s, " [path {}]", p.join(" -> "));
                }
                None => {}
            }
            s.push('\n');
        }
        for (k, v) in &self.stats {
            let _ = writeln!(s, "  {k} = {v}");
        }
        s
    }
}
