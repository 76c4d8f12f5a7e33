use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

pub const SCHEMA: u32 = 1;

/// Machine-readable record of one run. Field order is fixed and every map is
/// sorted, so equal runs serialize identically apart from timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    /// `proved`, `refuted`, `inconclusive`, `passed`, `violation`, `ok` or `error`.
    pub verdict: String,
    pub exit_code: i32,
    pub elapsed_ms: u64,
    /// Lemma-set hash per domain used.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub catalog_fingerprint: BTreeMap<String, String>,
    #[serde(default)]
    pub data: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Self {
            schema: SCHEMA,
            tool: "fpan".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            verdict: "error".into(),
            exit_code: 3,
            elapsed_ms: 0,
            catalog_fingerprint: BTreeMap::new(),
            data: Value::Null,
            explanation: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let r: Report = serde_json::from_str(text)?;
        anyhow::ensure!(r.schema == SCHEMA, "unsupported report schema {}", r.schema);
        Ok(r)
    }
}
