use serde::{Deserialize, Serialize};

/// Outcome of one exhaustive or sampled verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub checked: u64,
    pub pass: bool,
    /// First failing object, serialized by the check that produced it.
    pub counterexample: Option<serde_json::Value>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

impl CheckReport {
    pub fn passed(name: impl Into<String>, checked: u64) -> Self {
        CheckReport {
            name: name.into(),
            checked,
            pass: true,
            counterexample: None,
            c1: None,
            c2: None,
        }
    }

    pub fn failed(name: impl Into<String>, checked: u64, counterexample: serde_json::Value) -> Self {
        CheckReport {
            name: name.into(),
            checked,
            pass: false,
            counterexample: Some(counterexample),
            c1: None,
            c2: None,
        }
    }
}
