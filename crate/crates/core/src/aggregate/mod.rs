//! Batch-level analyses: funnel rows per model and language, the
//! execution-to-spatial gap with a bootstrap interval, quantile pass-rate
//! tables, the joint high-risk region, and report emission.

mod gap;
mod quantile;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use gap::{exec_spatial_gap, exec_spatial_gap_macro, percentile, GapMode, GapResult};
pub use quantile::{
    joint_risk_region, quantile_analysis, JointRisk, QuantileBucket, QuantileResult, RiskPoint,
};
pub use report::{build_analyses, emit_report, render_report, Analyses, ReportFormat, SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::model::{Language, SampleVerdict};
use crate::reliability::{error_breakdown, exec_pass_rate, ErrorCategory};
use crate::spatial::ViolationKind;

/// One table row: a model evaluated on one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub model: String,
    pub language: Language,
    pub n: usize,
    pub exec: f64,
    pub spatial: f64,
    /// Mean render minutes over executed samples.
    pub time_min: Option<f64>,
    pub padvc_c: Option<f64>,
    pub td_c: Option<f64>,
    pub overlap_rate: f64,
    pub leak_rate: f64,
    pub oob_rate: f64,
    /// Failure-category percentages over the whole batch.
    pub error_pct: BTreeMap<ErrorCategory, f64>,
}

impl ModelRow {
    pub fn exec_fail_pct(&self) -> f64 {
        100.0 * (1.0 - self.exec)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn funnel_aggregate(verdicts: &[SampleVerdict], model: &str, language: Language) -> Result<ModelRow> {
    let exec = exec_pass_rate(verdicts)?;
    let n = verdicts.len();
    let spatial = verdicts.iter().filter(|v| v.spatial_pass()).count() as f64 / n as f64;
    let executed: Vec<&SampleVerdict> = verdicts.iter().filter(|v| v.exec_pass).collect();
    let kind_rate = |kind: ViolationKind| {
        if executed.is_empty() {
            0.0
        } else {
            executed.iter().filter(|v| v.has_violation(kind)).count() as f64 / executed.len() as f64
        }
    };
    Ok(ModelRow {
        model: model.to_string(),
        language,
        n,
        exec,
        spatial,
        time_min: mean(executed.iter().filter_map(|v| v.render_time_min)),
        padvc_c: mean(executed.iter().filter_map(|v| v.padvc_centered)),
        td_c: mean(executed.iter().filter_map(|v| v.td_centered)),
        overlap_rate: kind_rate(ViolationKind::Overlap),
        leak_rate: kind_rate(ViolationKind::Leakage),
        oob_rate: kind_rate(ViolationKind::OutOfBounds),
        error_pct: error_breakdown(verdicts)?,
    })
}

/// Verdicts tagged with the batch they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedVerdict {
    pub model: String,
    pub language: Language,
    #[serde(flatten)]
    pub verdict: SampleVerdict,
}

/// Groups verdicts by `(model, language)`; rows come out sorted by language
/// then model, never pooling languages.
pub fn rows_by_group(tagged: &[TaggedVerdict]) -> Result<Vec<ModelRow>> {
    if tagged.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut groups: BTreeMap<(Language, &str), Vec<SampleVerdict>> = BTreeMap::new();
    for t in tagged {
        groups
            .entry((t.language, t.model.as_str()))
            .or_default()
            .push(t.verdict.clone());
    }
    groups
        .into_iter()
        .map(|((language, model), vs)| funnel_aggregate(&vs, model, language))
        .collect()
}
