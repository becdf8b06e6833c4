use log::warn;

use super::hierarchy::ResolvedObject;
use super::{SpatialViolation, ViolationKind};
use crate::config::MetricConfig;
use crate::model::CanvasSpec;

/// Flags unrelated visible leaf pairs whose intersection covers more than
/// `overlap_area_frac` of the smaller box.
pub fn check_overlap(
    resolved: &[ResolvedObject<'_>],
    snapshot_index: u64,
    cfg: &MetricConfig,
) -> Vec<SpatialViolation> {
    let leaves: Vec<&ResolvedObject<'_>> = resolved
        .iter()
        .filter(|r| r.is_leaf && r.effective_opacity > 0.0 && r.object.bbox.area() > 0.0)
        .collect();
    let mut out = Vec::new();
    for (i, a) in leaves.iter().enumerate() {
        for b in &leaves[i + 1..] {
            if a.related_to(b) {
                continue;
            }
            let inter = a.object.bbox.intersection_area(&b.object.bbox);
            if inter <= 0.0 {
                continue;
            }
            let ratio = inter / a.object.bbox.area().min(b.object.bbox.area());
            if ratio > cfg.overlap_area_frac {
                out.push(SpatialViolation::new(
                    ViolationKind::Overlap,
                    snapshot_index,
                    vec![a.id().to_string(), b.id().to_string()],
                    ratio,
                ));
            }
        }
    }
    out
}

/// Flags leaves with more than `oob_frac` of their area outside the canvas.
/// Zero-area boxes are skipped.
pub fn check_out_of_bounds(
    resolved: &[ResolvedObject<'_>],
    canvas: &CanvasSpec,
    snapshot_index: u64,
    cfg: &MetricConfig,
) -> Vec<SpatialViolation> {
    let frame = canvas.bounds();
    let mut out = Vec::new();
    for r in resolved.iter().filter(|r| r.is_leaf) {
        let bbox = &r.object.bbox;
        let area = bbox.area();
        if area <= 0.0 {
            warn!(
                "snapshot {snapshot_index}: skipping degenerate bbox of {:?} in bounds check",
                r.id()
            );
            continue;
        }
        let outside = (area - bbox.intersection_area(&frame)) / area;
        if outside > cfg.oob_frac {
            out.push(SpatialViolation::new(
                ViolationKind::OutOfBounds,
                snapshot_index,
                vec![r.id().to_string()],
                outside,
            ));
        }
    }
    out
}

/// Flags children that stick out of a container-tagged parent by more than
/// `leak_margin` on any side. Severity is the largest per-side exceedance.
pub fn check_leakage(
    resolved: &[ResolvedObject<'_>],
    snapshot_index: u64,
    cfg: &MetricConfig,
) -> Vec<SpatialViolation> {
    let mut out = Vec::new();
    for child in resolved {
        let Some(parent_id) = child.object.parent_id.as_deref() else {
            continue;
        };
        let Some(parent) = resolved.iter().find(|r| r.id() == parent_id) else {
            continue;
        };
        let is_container = cfg
            .container_roles
            .iter()
            .any(|role| parent.object.has_tag(role));
        if !is_container {
            continue;
        }
        let (c, p) = (&child.object.bbox, &parent.object.bbox);
        let exceed = [p.xmin - c.xmin, c.xmax - p.xmax, p.ymin - c.ymin, c.ymax - p.ymax]
            .into_iter()
            .fold(0.0_f64, f64::max);
        if exceed > cfg.leak_margin {
            out.push(SpatialViolation::new(
                ViolationKind::Leakage,
                snapshot_index,
                vec![child.id().to_string()],
                exceed,
            ));
        }
    }
    out
}
