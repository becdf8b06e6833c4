//! Funnel evaluation for code-driven animation programs.
//!
//! A sample moves through three gates: did the code render, does the laid-out
//! scene stay legible (no overlaps, leaks or off-canvas objects), and how do
//! the rendered frames move. Each gate lives in its own module; `batch`
//! strings them together and `aggregate` turns verdicts into tables.
//!
//! ```
//! use animeval::config::MetricConfig;
//! use animeval::model::{BBox, SceneObject, SceneSnapshot};
//! use animeval::spatial::audit_snapshot;
//!
//! let snap = SceneSnapshot::new("demo", 0, 0.0)
//!     .with_object(SceneObject::new("title", "Text", BBox::new(-2.0, 3.0, 2.0, 3.6)).text())
//!     .with_object(SceneObject::new("ball", "Circle", BBox::new(-0.5, -0.5, 0.5, 0.5)));
//! assert!(audit_snapshot(&snap, &MetricConfig::default()).is_empty());
//! ```

pub mod aggregate;
pub mod batch;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod model;
pub mod raster;
pub mod reliability;
pub mod spatial;
pub mod text_analysis;

pub use config::MetricConfig;
pub use error::{Error, Result};
pub use model::{EvaluationSample, Language, SampleVerdict};
