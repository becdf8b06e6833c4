//! Spatial audit over scene-graph snapshots.
//!
//! Each snapshot is expanded into its object hierarchy, checked for layout
//! overlap, out-of-bounds placement and container leakage on axis-aligned
//! bounding boxes, and then passed through false-positive suppression. A
//! sample passes only if it rendered and no snapshot holds an unsuppressed
//! violation.

mod checks;
mod hierarchy;
mod suppress;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{check_leakage, check_out_of_bounds, check_overlap};
pub use hierarchy::{expand_hierarchy, ResolvedObject};
pub use suppress::{
    suppress_false_positives, REASON_BACKGROUND, REASON_GRID, REASON_HIGHLIGHT, REASON_TRANSPARENT,
};

use crate::config::MetricConfig;
use crate::model::{EvaluationSample, SceneSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    Overlap,
    OutOfBounds,
    Leakage,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 3] = [
        ViolationKind::Overlap,
        ViolationKind::Leakage,
        ViolationKind::OutOfBounds,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialViolation {
    pub kind: ViolationKind,
    pub snapshot_index: u64,
    /// Two ids for overlaps, one otherwise.
    pub object_ids: Vec<String>,
    pub severity: f64,
    pub suppressed: bool,
    pub suppression_reason: Option<String>,
}

impl SpatialViolation {
    pub fn new(kind: ViolationKind, snapshot_index: u64, object_ids: Vec<String>, severity: f64) -> Self {
        Self {
            kind,
            snapshot_index,
            object_ids,
            severity,
            suppressed: false,
            suppression_reason: None,
        }
    }
}

/// Runs all three checks and suppression on one snapshot.
pub fn audit_snapshot(snapshot: &SceneSnapshot, cfg: &MetricConfig) -> Vec<SpatialViolation> {
    let resolved = expand_hierarchy(snapshot);
    let idx = snapshot.snapshot_index;
    let mut found = check_overlap(&resolved, idx, cfg);
    found.extend(check_out_of_bounds(&resolved, &snapshot.canvas, idx, cfg));
    found.extend(check_leakage(&resolved, idx, cfg));
    suppress_false_positives(found, &resolved, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialAudit {
    pub pass: bool,
    /// Whether each kind occurred unsuppressed in at least one snapshot.
    pub per_kind_flags: BTreeMap<ViolationKind, bool>,
    pub violations: Vec<SpatialViolation>,
}

impl SpatialAudit {
    pub fn flagged(&self, kind: ViolationKind) -> bool {
        self.per_kind_flags.get(&kind).copied().unwrap_or(false)
    }
}

/// Audits every snapshot of a sample. Snapshots are checked in parallel and
/// merged in snapshot order.
pub fn spatial_pass(sample: &EvaluationSample, cfg: &MetricConfig) -> SpatialAudit {
    let mut per_kind_flags: BTreeMap<ViolationKind, bool> =
        ViolationKind::ALL.iter().map(|&k| (k, false)).collect();
    if !sample.render_outcome.is_success() {
        return SpatialAudit {
            pass: false,
            per_kind_flags,
            violations: Vec::new(),
        };
    }
    let violations: Vec<SpatialViolation> = sample
        .snapshots()
        .par_iter()
        .map(|s| audit_snapshot(s, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    for v in violations.iter().filter(|v| !v.suppressed) {
        per_kind_flags.insert(v.kind, true);
    }
    SpatialAudit {
        pass: !per_kind_flags.values().any(|&f| f),
        per_kind_flags,
        violations,
    }
}
