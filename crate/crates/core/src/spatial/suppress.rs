use super::hierarchy::ResolvedObject;
use super::{SpatialViolation, ViolationKind};
use crate::config::MetricConfig;

pub const REASON_HIGHLIGHT: &str = "highlight";
pub const REASON_BACKGROUND: &str = "background";
pub const REASON_GRID: &str = "grid_adjacency";
pub const REASON_TRANSPARENT: &str = "transparent";

const GRID_ALLOWANCE: f64 = 1.05;

/// Marks intentional overlaps as suppressed. Violations are never removed.
pub fn suppress_false_positives(
    mut violations: Vec<SpatialViolation>,
    resolved: &[ResolvedObject<'_>],
    cfg: &MetricConfig,
) -> Vec<SpatialViolation> {
    let find = |id: &str| resolved.iter().find(|r| r.id() == id);
    for v in violations.iter_mut().filter(|v| v.kind == ViolationKind::Overlap) {
        let (Some(a), Some(b)) = (
            v.object_ids.first().and_then(|id| find(id)),
            v.object_ids.get(1).and_then(|id| find(id)),
        ) else {
            continue;
        };
        let either = |tag: &str| a.object.has_tag(tag) || b.object.has_tag(tag);
        let reason = if either("highlight") {
            Some(REASON_HIGHLIGHT)
        } else if either("background") {
            Some(REASON_BACKGROUND)
        } else if a.object.has_tag("grid_cell")
            && b.object.has_tag("grid_cell")
            && v.severity <= GRID_ALLOWANCE * cfg.grid_abutment_tol
        {
            Some(REASON_GRID)
        } else if a.effective_opacity <= cfg.suppress_opacity
            || b.effective_opacity <= cfg.suppress_opacity
        {
            Some(REASON_TRANSPARENT)
        } else {
            None
        };
        if let Some(reason) = reason {
            v.suppressed = true;
            v.suppression_reason = Some(reason.to_string());
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BBox, SceneObject, SceneSnapshot};
    use crate::spatial::{check_overlap, expand_hierarchy};

    fn run(snap: &SceneSnapshot) -> Vec<SpatialViolation> {
        let cfg = MetricConfig::default();
        let r = expand_hierarchy(snap);
        suppress_false_positives(check_overlap(&r, 0, &cfg), &r, &cfg)
    }

    #[test]
    fn highlight_over_text() {
        let snap = SceneSnapshot::new("s", 0, 0.0)
            .with_object(SceneObject::new("t", "Text", BBox::new(0.0, 0.0, 2.0, 0.5)).text())
            .with_object(
                SceneObject::new("hl", "SurroundingRectangle", BBox::new(-0.1, -0.1, 2.1, 0.6))
                    .with_tag("highlight"),
            );
        let v = run(&snap);
        assert_eq!(v.len(), 1);
        assert!(v[0].suppressed);
        assert_eq!(v[0].suppression_reason.as_deref(), Some("highlight"));
    }

    #[test]
    fn abutting_grid_cells() {
        // Cells overlap by a thin sliver: ratio 0.12 trips the checker but is
        // within the abutment allowance.
        let snap = SceneSnapshot::new("s", 0, 0.0)
            .with_object(SceneObject::new("c1", "Rectangle", BBox::new(0.0, 0.0, 1.0, 1.0)).with_tag("grid_cell"))
            .with_object(SceneObject::new("c2", "Rectangle", BBox::new(0.88, 0.0, 1.88, 1.0)).with_tag("grid_cell"));
        let v = run(&snap);
        assert_eq!(v.len(), 1);
        assert!(v[0].suppressed);
        assert_eq!(v[0].suppression_reason.as_deref(), Some("grid_adjacency"));
    }

    #[test]
    fn heavily_overlapping_grid_cells_still_flagged() {
        let snap = SceneSnapshot::new("s", 0, 0.0)
            .with_object(SceneObject::new("c1", "Rectangle", BBox::new(0.0, 0.0, 1.0, 1.0)).with_tag("grid_cell"))
            .with_object(SceneObject::new("c2", "Rectangle", BBox::new(0.5, 0.0, 1.5, 1.0)).with_tag("grid_cell"));
        let v = run(&snap);
        assert!(!v[0].suppressed);
    }

    #[test]
    fn unrelated_labels_not_suppressed() {
        let snap = SceneSnapshot::new("s", 0, 0.0)
            .with_object(SceneObject::new("a", "Text", BBox::new(0.0, 0.0, 1.0, 0.3)).text())
            .with_object(SceneObject::new("b", "Text", BBox::new(0.0, 0.0, 1.0, 0.3)).text());
        let v = run(&snap);
        assert_eq!(v.len(), 1);
        assert!(!v[0].suppressed);
        assert!(v[0].suppression_reason.is_none());
    }

    #[test]
    fn nearly_transparent_overlap() {
        let snap = SceneSnapshot::new("s", 0, 0.0)
            .with_object(SceneObject::new("a", "Square", BBox::new(0.0, 0.0, 1.0, 1.0)).with_opacity(0.04))
            .with_object(SceneObject::new("b", "Square", BBox::new(0.0, 0.0, 1.0, 1.0)));
        let v = run(&snap);
        assert_eq!(v[0].suppression_reason.as_deref(), Some("transparent"));
    }
}
