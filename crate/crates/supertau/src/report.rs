//! Check results and suite reports.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub status: Status,
    pub runtime_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residue: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Check {
    /// Run a check; `Ok(None)` passes, `Ok(Some(residue))` fails. A panic
    /// (e.g. an index beyond the computed tables) is reported as an error.
    pub fn timed(id: impl Into<String>, f: impl FnOnce() -> Result<Option<String>, Error>) -> Check {
        let start = Instant::now();
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(Error::TruncationTooSmall(msg.trim_start_matches("truncation too small: ").to_string()))
        });
        let runtime_ms = start.elapsed().as_millis() as u64;
        let (status, residue) = match r {
            Ok(None) => (Status::Pass, None),
            Ok(Some(res)) => (Status::Fail, Some(res)),
            Err(e) => (Status::Error, Some(e.to_string())),
        };
        Check { id: id.into(), status, runtime_ms, residue, witness: None, note: None }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }

    pub fn with_witness(mut self, w: impl Into<String>) -> Check {
        self.witness = Some(w.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub environment: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<u64>,
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Report {
        Report { suite: suite.into(), checks: Vec::new(), environment: BTreeMap::new(), timestamp: None }
    }

    pub fn env(mut self, k: &str, v: impl Serialize) -> Report {
        self.environment.insert(k.to_string(), serde_json::to_value(v).expect("serializable"));
        self
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    /// Order checks by id for deterministic output.
    pub fn sort(&mut self) {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn stamp(&mut self) {
        let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        self.timestamp = Some(now);
    }

    /// Drop the volatile fields so that identical runs serialize identically.
    pub fn without_runtimes(mut self) -> Report {
        for c in &mut self.checks {
            c.runtime_ms = 0;
        }
        self
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("suite {}\n", self.suite);
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
            };
            s.push_str(&format!("{:5} {} ({} ms)", tag, c.id, c.runtime_ms));
            if let Some(r) = &c.residue {
                s.push_str(&format!("\n      residue: {}", r));
            }
            if let Some(n) = &c.note {
                s.push_str(&format!("\n      note: {}", n));
            }
            s.push('\n');
        }
        let passed = self.checks.iter().filter(|c| c.passed()).count();
        s.push_str(&format!("{}/{} checks passed\n", passed, self.checks.len()));
        s
    }
}

/// Residue text for a polynomial that should vanish.
pub fn residue(p: &crate::jet::DiffPoly) -> Option<String> {
    if p.is_zero() {
        None
    } else {
        Some(crate::jet::fmt::to_text(p))
    }
}
