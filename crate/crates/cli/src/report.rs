//! The JSON report emitted by analysis subcommands. Field order is fixed and
//! no wall-clock data is included unless `--timings` is passed, so a given
//! (spec, seed, version) triple always produces the same bytes.

use ergomix::dobrushin::ErgodicityReport;
use ergomix::mixing::{MixingReport, StrongStabilityReport};
use ergomix::stability::StabilityReport;
use ergomix::superop::MapPredicates;
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
    pub schema: u32,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: "ergomix",
            version: env!("CARGO_PKG_VERSION"),
            schema: SCHEMA_VERSION,
        }
    }
}

#[derive(Serialize)]
pub struct ReportDocument {
    pub tool: ToolInfo,
    pub seed: u64,
    /// Echo of the input document, so a report is self-describing.
    pub spec: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicates: Option<MapPredicates>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ergodicity: Option<ErgodicityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityReport>,
    /// Set instead of `stability` when that phase does not apply (for
    /// example, a non-stochastic map).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_stability: Option<StrongStabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_stability_skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<&'static str, f64>>,
}

impl ReportDocument {
    pub fn new(seed: u64, spec: Value) -> Self {
        ReportDocument {
            tool: ToolInfo::default(),
            seed,
            spec,
            predicates: None,
            ergodicity: None,
            stability: None,
            stability_skipped: None,
            mixing: None,
            strong_stability: None,
            strong_stability_skipped: None,
            timings_ms: None,
        }
    }
}
