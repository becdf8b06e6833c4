mod common;

use animeval::config::MetricConfig;
use animeval::model::{BBox, CanvasSpec, SceneObject, SceneSnapshot};
use animeval::spatial::{audit_snapshot, expand_hierarchy, SpatialViolation, ViolationKind};
use common::{non_tangent_scene, rng, OracleFlag};

fn as_flags(found: &[SpatialViolation]) -> Vec<OracleFlag> {
    let mut out: Vec<OracleFlag> = found
        .iter()
        .map(|v| OracleFlag {
            kind: match v.kind {
                ViolationKind::Overlap => "Overlap",
                ViolationKind::OutOfBounds => "OutOfBounds",
                ViolationKind::Leakage => "Leakage",
            },
            ids: v.object_ids.clone(),
            suppressed: match v.suppression_reason.as_deref() {
                None => None,
                Some("highlight") => Some("highlight"),
                Some("background") => Some("background"),
                Some("grid_adjacency") => Some("grid_adjacency"),
                Some("transparent") => Some("transparent"),
                Some(other) => panic!("unexpected reason {other}"),
            },
        })
        .collect();
    out.sort_by(|a, b| (a.kind, &a.ids).cmp(&(b.kind, &b.ids)));
    out
}

fn sorted(mut flags: Vec<OracleFlag>) -> Vec<OracleFlag> {
    flags.sort_by(|a, b| (a.kind, &a.ids).cmp(&(b.kind, &b.ids)));
    flags
}

#[test]
fn checker_agrees_with_rasterized_oracle() {
    let cfg = MetricConfig::default();
    let mut r = rng(11);
    for i in 0..60 {
        let (scene, oracle) = non_tangent_scene(&mut r, i, &cfg, 1e-6);
        scene.snapshot.validate().unwrap();
        let got = as_flags(&audit_snapshot(&scene.snapshot, &cfg));
        assert_eq!(got, sorted(oracle.flags), "scene {i}");
    }
}

#[test]
fn ancestors_are_never_paired() {
    let cfg = MetricConfig::default();
    let mut r = rng(12);
    for i in 0..60 {
        let (scene, _) = non_tangent_scene(&mut r, i, &cfg, 1e-6);
        let resolved = expand_hierarchy(&scene.snapshot);
        for v in audit_snapshot(&scene.snapshot, &cfg).iter().filter(|v| v.kind == ViolationKind::Overlap) {
            let a = resolved.iter().find(|o| o.id() == v.object_ids[0]).unwrap();
            let b = resolved.iter().find(|o| o.id() == v.object_ids[1]).unwrap();
            assert!(!a.related_to(b));
        }
    }
}

#[test]
fn group_members_nested_in_their_group_are_fine() {
    let snap = SceneSnapshot::new("s", 0, 0.0)
        .with_object(SceneObject::new("g", "VGroup", BBox::new(-2.0, -2.0, 2.0, 2.0)).with_tag("container"))
        .with_object(SceneObject::new("a", "Square", BBox::new(-1.9, -1.0, -0.1, 1.0)).with_parent("g"))
        .with_object(SceneObject::new("b", "Square", BBox::new(0.1, -1.0, 1.9, 1.0)).with_parent("g"));
    assert!(audit_snapshot(&snap, &MetricConfig::default()).is_empty());
}

#[test]
fn highlight_box_around_label_is_suppressed() {
    let snap = SceneSnapshot::new("s", 0, 0.0)
        .with_object(SceneObject::new("label", "MathTex", BBox::new(-1.0, -0.3, 1.0, 0.3)).text())
        .with_object(SceneObject::new("box", "SurroundingRectangle", BBox::new(-1.1, -0.4, 1.1, 0.4)).with_tag("highlight"));
    let found = audit_snapshot(&snap, &MetricConfig::default());
    assert_eq!(found.len(), 1);
    assert!(found[0].suppressed);
    assert_eq!(found[0].suppression_reason.as_deref(), Some("highlight"));
}

#[test]
fn table_cells_sharing_borders_are_suppressed() {
    let mut snap = SceneSnapshot::new("s", 0, 0.0);
    for col in 0..3 {
        let x0 = col as f64 * 0.88;
        snap = snap.with_object(
            SceneObject::new(format!("c{col}"), "Rectangle", BBox::new(x0, 0.0, x0 + 1.0, 1.0)).with_tag("grid_cell"),
        );
    }
    let found = audit_snapshot(&snap, &MetricConfig::default());
    assert_eq!(found.len(), 2);
    assert!(found.iter().all(|v| v.suppression_reason.as_deref() == Some("grid_adjacency")));
}

#[test]
fn audit_is_translation_invariant() {
    let cfg = MetricConfig::default();
    let mut r = rng(13);
    for i in 0..30 {
        let (scene, _) = non_tangent_scene(&mut r, i, &cfg, 1e-3);
        let base = audit_snapshot(&scene.snapshot, &cfg);
        let (dx, dy) = (3.5, -1.25);
        let mut moved = scene.snapshot.clone();
        moved.canvas = CanvasSpec { center: [dx, dy], ..moved.canvas };
        for o in &mut moved.objects {
            o.bbox = o.bbox.translated(dx, dy);
        }
        let shifted = audit_snapshot(&moved, &cfg);
        assert_eq!(as_flags(&base), as_flags(&shifted), "scene {i}");
    }
}
