use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub played: u64,
    pub accepted: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bytes {
    pub verifier_to_prover: u64,
    pub prover_to_verifier: u64,
}

/// One asserted invariant or numerical check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    #[serde(default)]
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    /// Randomized trials run; equals the sum of `counts[*].played`.
    pub trials: u64,
    pub counts: BTreeMap<String, Counts>,
    /// Exactly computed probabilities and values.
    pub exact: BTreeMap<String, f64>,
    pub bytes: Bytes,
    pub verdicts: Vec<Verdict>,
    /// Command-specific tables.
    pub data: serde_json::Value,
    pub all_passed: bool,
    pub wall_clock_ms: u64,
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        RunReport {
            command: command.into(),
            config: config.clone(),
            trials: 0,
            counts: BTreeMap::new(),
            exact: BTreeMap::new(),
            bytes: Bytes::default(),
            verdicts: Vec::new(),
            data: serde_json::Value::Null,
            all_passed: true,
            wall_clock_ms: 0,
        }
    }

    pub fn count(&mut self, key: &str, accepted: bool) {
        let c = self.counts.entry(key.into()).or_default();
        c.played += 1;
        c.accepted += accepted as u64;
        self.trials += 1;
    }

    pub fn verdict(&mut self, name: &str, passed: bool, detail: serde_json::Value) {
        self.all_passed &= passed;
        self.verdicts.push(Verdict { name: name.into(), passed, detail });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
