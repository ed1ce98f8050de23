//! JSON reports emitted by the `pneq` binary.

use serde::{Deserialize, Serialize};

/// Machine-readable run report.
#[derive(Serialize, Deserialize, Debug, Default, PartialEq)]
pub struct Report {
    pub command: Vec<String>,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<[String; 2]>>,
    #[serde(default)]
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marking: Option<String>,
    pub stats: Stats,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct Violation {
    pub transition: String,
    pub side: String,
    pub m1: String,
    pub m2: String,
}

#[derive(Serialize, Deserialize, Debug, Default, PartialEq)]
pub struct Stats {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations_examined: Option<u64>,
    pub elapsed_ms: f64,
}
