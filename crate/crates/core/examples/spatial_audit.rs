//! Audits one scene snapshot for overlap, leakage and out-of-bounds layout.

use animeval::config::MetricConfig;
use animeval::model::{BBox, CanvasSpec, SceneObject, SceneSnapshot};
use animeval::spatial::audit_snapshot;

fn main() -> animeval::Result<()> {
    let snapshot = SceneSnapshot::new("demo", 0, 2.0)
        .with_canvas(CanvasSpec::new(14.222, 8.0))
        .with_object(SceneObject::new("title", "Text", BBox::new(-3.0, 3.0, 3.0, 3.7)).text())
        // Label box and the text it is supposed to hold.
        .with_object(SceneObject::new("card", "RoundedRectangle", BBox::new(-6.0, -1.0, -2.0, 1.0)).with_tag("textbox"))
        .with_object(SceneObject::new("caption", "Text", BBox::new(-5.8, -0.3, -1.2, 0.3)).text().with_parent("card"))
        // Two plots drawn on top of each other.
        .with_object(SceneObject::new("plot_a", "Axes", BBox::new(0.0, -2.0, 4.0, 1.5)))
        .with_object(SceneObject::new("plot_b", "Axes", BBox::new(1.5, -2.5, 5.5, 1.0)))
        .with_object(SceneObject::new("legend", "VGroup", BBox::new(5.8, 2.0, 8.6, 3.0)))
        .with_object(SceneObject::new("focus", "SurroundingRectangle", BBox::new(-3.1, 2.9, 3.1, 3.8)).with_tag("highlight"));
    snapshot.validate()?;

    let cfg = MetricConfig::default();
    let violations = audit_snapshot(&snapshot, &cfg);
    for v in &violations {
        let status = match &v.suppression_reason {
            Some(reason) => format!("suppressed ({reason})"),
            None => "FLAGGED".to_string(),
        };
        println!("{:<12?} {:<22} severity {:.3}  {status}", v.kind, v.object_ids.join(" + "), v.severity);
    }
    let pass = violations.iter().all(|v| v.suppressed);
    println!("\nspatial pass: {pass}");
    Ok(())
}
