//! Shared data model: one evaluation sample (prompt, environment constraint,
//! generated code and whatever the renderer produced), the scene-graph
//! snapshots captured while rendering, and the per-sample verdict.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GrayFrame;
use crate::reliability::ErrorCategory;
use crate::spatial::SpatialViolation;

/// Tolerance, in world units, for point-set hull vs. bbox agreement.
pub const HULL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Zh,
}

impl Language {
    pub const ALL: [Language; 2] = [Language::En, Language::Zh];

    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Zh => "zh",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(Language::En),
            "zh" | "chinese" => Ok(Language::Zh),
            other => Err(Error::Schema(format!("unknown language {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecStatus {
    Success,
    Failure,
}

/// What the renderer reported for one attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecOutcome {
    pub status: ExecStatus,
    pub trace: Option<String>,
    /// Wall-clock render time in minutes; present only on success.
    pub render_time_min: Option<f64>,
    /// Leading bytes of the raw model output, used to spot markdown wrappers.
    pub stdout_head: Option<String>,
}

impl ExecOutcome {
    pub fn success(render_time_min: f64) -> Self {
        Self {
            status: ExecStatus::Success,
            trace: None,
            render_time_min: Some(render_time_min),
            stdout_head: None,
        }
    }

    pub fn failure(trace: impl Into<String>) -> Self {
        Self {
            status: ExecStatus::Failure,
            trace: Some(trace.into()),
            render_time_min: None,
            stdout_head: None,
        }
    }

    pub fn with_stdout_head(mut self, head: impl Into<String>) -> Self {
        self.stdout_head = Some(head.into());
        self
    }

    pub fn is_success(&self) -> bool {
        self.status == ExecStatus::Success
    }

    fn validate(&self) -> Result<()> {
        match self.status {
            ExecStatus::Success => {
                if self.trace.is_some() {
                    return Err(Error::Schema("successful outcome carries a trace".into()));
                }
                match self.render_time_min {
                    Some(t) if t.is_finite() && t >= 0.0 => Ok(()),
                    Some(t) => Err(Error::Schema(format!("invalid render time {t}"))),
                    None => Err(Error::Schema("successful outcome lacks render time".into())),
                }
            }
            ExecStatus::Failure => {
                if self.render_time_min.is_some() {
                    return Err(Error::Schema("failed outcome carries a render time".into()));
                }
                match &self.trace {
                    Some(t) if !t.trim().is_empty() => Ok(()),
                    _ => Err(Error::Schema("failed outcome lacks an error trace".into())),
                }
            }
        }
    }
}

/// Ordered grayscale frames sharing one size.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<GrayFrame>,
    fps: f64,
    source_path: String,
}

impl FrameSequence {
    pub fn new(frames: Vec<GrayFrame>, fps: f64, source_path: impl Into<String>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Schema("frame sequence is empty".into()));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Schema(format!("fps must be positive, got {fps}")));
        }
        let dims = frames[0].dims();
        if let Some(bad) = frames.iter().find(|f| f.dims() != dims) {
            return Err(Error::Dimension {
                expected: dims,
                found: bad.dims(),
            });
        }
        Ok(Self {
            frames,
            fps,
            source_path: source_path.into(),
        })
    }

    pub fn frames(&self) -> &[GrayFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }
}

/// Axis-aligned rectangle in world units, serialized as `[xmin, ymin, xmax, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.xmin, b.ymin, b.xmax, b.ymax]
    }
}

impl BBox {
    pub const fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Self {
            xmin,
            ymin,
            xmax,
            ymax,
        }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let b = BBox::new(
            self.xmin.max(other.xmin),
            self.ymin.max(other.ymin),
            self.xmax.min(other.xmax),
            self.ymax.min(other.ymax),
        );
        (b.xmin < b.xmax && b.ymin < b.ymax).then_some(b)
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        self.intersection(other).map_or(0.0, |b| b.area())
    }

    pub fn expanded(&self, margin: f64) -> BBox {
        BBox::new(
            self.xmin - margin,
            self.ymin - margin,
            self.xmax + margin,
            self.ymax + margin,
        )
    }

    pub fn translated(&self, dx: f64, dy: f64) -> BBox {
        BBox::new(self.xmin + dx, self.ymin + dy, self.xmax + dx, self.ymax + dy)
    }

    pub fn hull(points: &[[f64; 2]]) -> Option<BBox> {
        let first = points.first()?;
        let mut b = BBox::new(first[0], first[1], first[0], first[1]);
        for p in &points[1..] {
            b.xmin = b.xmin.min(p[0]);
            b.ymin = b.ymin.min(p[1]);
            b.xmax = b.xmax.max(p[0]);
            b.ymax = b.ymax.max(p[1]);
        }
        Some(b)
    }

    fn is_finite(&self) -> bool {
        [self.xmin, self.ymin, self.xmax, self.ymax]
            .iter()
            .all(|v| v.is_finite())
    }
}

fn is_origin(c: &[f64; 2]) -> bool {
    c[0] == 0.0 && c[1] == 0.0
}

/// The visible frame. Centered on `center` (the origin unless overridden).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanvasSpec {
    pub width: f64,
    pub height: f64,
    #[serde(default, skip_serializing_if = "is_origin")]
    pub center: [f64; 2],
}

impl Default for CanvasSpec {
    fn default() -> Self {
        Self {
            width: 14.222,
            height: 8.0,
            center: [0.0, 0.0],
        }
    }
}

impl CanvasSpec {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            center: [0.0, 0.0],
        }
    }

    pub fn bounds(&self) -> BBox {
        let (hw, hh) = (self.width / 2.0, self.height / 2.0);
        BBox::new(
            self.center[0] - hw,
            self.center[1] - hh,
            self.center[0] + hw,
            self.center[1] + hh,
        )
    }

    fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0 && self.height.is_finite() && self.height > 0.0)
        {
            return Err(Error::Schema(format!(
                "canvas must have positive size, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    pub type_name: String,
    pub parent_id: Option<String>,
    pub is_text: bool,
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    pub opacity: f64,
    pub z_index: f64,
    #[serde(default)]
    pub role_tags: BTreeSet<String>,
}

impl SceneObject {
    /// A parentless, fully opaque, untagged object.
    pub fn new(id: impl Into<String>, type_name: impl Into<String>, bbox: BBox) -> Self {
        Self {
            id: id.into(),
            type_name: type_name.into(),
            parent_id: None,
            is_text: false,
            bbox,
            points: None,
            opacity: 1.0,
            z_index: 0.0,
            role_tags: BTreeSet::new(),
        }
    }

    pub fn with_parent(mut self, parent: impl Into<String>) -> Self {
        self.parent_id = Some(parent.into());
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.role_tags.insert(tag.into());
        self
    }

    pub fn with_opacity(mut self, opacity: f64) -> Self {
        self.opacity = opacity;
        self
    }

    pub fn text(mut self) -> Self {
        self.is_text = true;
        self
    }

    pub fn with_points(mut self, points: Vec<[f64; 2]>) -> Self {
        self.points = Some(points);
        self
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.role_tags.contains(tag)
    }

    fn validate(&self) -> Result<()> {
        let b = &self.bbox;
        if !b.is_finite() || b.xmin > b.xmax || b.ymin > b.ymax {
            return Err(Error::Schema(format!(
                "object {:?} has malformed bbox {:?}",
                self.id, b
            )));
        }
        if !(0.0..=1.0).contains(&self.opacity) {
            return Err(Error::Schema(format!(
                "object {:?} opacity {} outside [0,1]",
                self.id, self.opacity
            )));
        }
        if !self.z_index.is_finite() {
            return Err(Error::Schema(format!("object {:?} has non-finite z_index", self.id)));
        }
        if let Some(points) = &self.points {
            let hull = BBox::hull(points).ok_or_else(|| {
                Error::Schema(format!("object {:?} has an empty point list", self.id))
            })?;
            let off = [
                (hull.xmin - b.xmin).abs(),
                (hull.ymin - b.ymin).abs(),
                (hull.xmax - b.xmax).abs(),
                (hull.ymax - b.ymax).abs(),
            ];
            if off.iter().any(|d| !(*d <= HULL_TOLERANCE)) {
                return Err(Error::Schema(format!(
                    "object {:?} bbox disagrees with its point hull {:?}",
                    self.id, hull
                )));
            }
        }
        Ok(())
    }
}

/// One scene-graph capture taken after an animation action settled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSnapshot {
    pub sample_id: String,
    pub snapshot_index: u64,
    pub time_s: f64,
    pub canvas: CanvasSpec,
    pub objects: Vec<SceneObject>,
}

impl SceneSnapshot {
    pub fn new(sample_id: impl Into<String>, snapshot_index: u64, time_s: f64) -> Self {
        Self {
            sample_id: sample_id.into(),
            snapshot_index,
            time_s,
            canvas: CanvasSpec::default(),
            objects: Vec::new(),
        }
    }

    pub fn with_canvas(mut self, canvas: CanvasSpec) -> Self {
        self.canvas = canvas;
        self
    }

    pub fn with_object(mut self, object: SceneObject) -> Self {
        self.objects.push(object);
        self
    }

    /// Checks ids, parent references, acyclicity and per-object geometry.
    pub fn validate(&self) -> Result<()> {
        if !(self.time_s.is_finite() && self.time_s >= 0.0) {
            return Err(Error::Schema(format!(
                "snapshot {} has invalid time {}",
                self.snapshot_index, self.time_s
            )));
        }
        self.canvas.validate()?;
        let mut parent_of: HashMap<&str, Option<&str>> = HashMap::with_capacity(self.objects.len());
        for obj in &self.objects {
            obj.validate()?;
            if parent_of
                .insert(obj.id.as_str(), obj.parent_id.as_deref())
                .is_some()
            {
                return Err(Error::Schema(format!(
                    "snapshot {} repeats object id {:?}",
                    self.snapshot_index, obj.id
                )));
            }
        }
        for obj in &self.objects {
            if let Some(parent) = obj.parent_id.as_deref() {
                if !parent_of.contains_key(parent) {
                    return Err(Error::Schema(format!(
                        "snapshot {}: object {:?} refers to missing parent {:?}",
                        self.snapshot_index, obj.id, parent
                    )));
                }
            }
        }
        // Walk each chain; a chain longer than the object count must loop.
        for obj in &self.objects {
            let mut seen = HashSet::new();
            let mut cursor = Some(obj.id.as_str());
            while let Some(id) = cursor {
                if !seen.insert(id) {
                    return Err(Error::Schema(format!(
                        "snapshot {}: parent cycle through {:?}",
                        self.snapshot_index, id
                    )));
                }
                cursor = parent_of[id];
            }
        }
        Ok(())
    }
}

/// One instruction/code pair plus everything rendering produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSample {
    pub sample_id: String,
    pub language: Language,
    pub prompt: String,
    pub env_spec: String,
    pub code: String,
    pub render_outcome: ExecOutcome,
    pub frames: Option<FrameSequence>,
    pub snapshots: Option<Vec<SceneSnapshot>>,
}

impl EvaluationSample {
    pub fn snapshots(&self) -> &[SceneSnapshot] {
        self.snapshots.as_deref().unwrap_or(&[])
    }
}

/// Decoded, not yet validated, sample artifacts.
#[derive(Debug, Clone, Default)]
pub struct RawSample {
    pub sample_id: String,
    pub language: Option<Language>,
    pub prompt: Option<String>,
    pub env_spec: Option<String>,
    pub code: Option<String>,
    pub outcome: Option<ExecOutcome>,
    pub frames: Option<FrameSequence>,
    pub snapshots: Option<Vec<SceneSnapshot>>,
}

pub fn validate_sample(raw: RawSample) -> Result<EvaluationSample> {
    let missing = |field: &str| Error::Schema(format!("sample {:?}: missing {field}", raw.sample_id));
    if raw.sample_id.trim().is_empty() {
        return Err(Error::Schema("sample id is empty".into()));
    }
    let language = raw.language.ok_or_else(|| missing("language"))?;
    let code = raw.code.clone().ok_or_else(|| missing("code"))?;
    let outcome = raw.outcome.clone().ok_or_else(|| missing("render outcome"))?;
    outcome.validate()?;

    let success = outcome.is_success();
    match (success, raw.frames.is_some(), raw.snapshots.is_some()) {
        (true, true, true) | (false, false, false) => {}
        (true, _, _) => {
            return Err(Error::Schema(format!(
                "sample {:?}: successful render must provide frames and snapshots",
                raw.sample_id
            )))
        }
        (false, _, _) => {
            return Err(Error::Schema(format!(
                "sample {:?}: failed render must not carry frames or snapshots",
                raw.sample_id
            )))
        }
    }

    if let Some(snapshots) = &raw.snapshots {
        let mut prev: Option<&SceneSnapshot> = None;
        for snap in snapshots {
            if snap.sample_id != raw.sample_id {
                return Err(Error::Schema(format!(
                    "snapshot {} belongs to sample {:?}, expected {:?}",
                    snap.snapshot_index, snap.sample_id, raw.sample_id
                )));
            }
            snap.validate()?;
            if let Some(p) = prev {
                if snap.snapshot_index <= p.snapshot_index {
                    return Err(Error::Schema(format!(
                        "snapshot indices not strictly increasing: {} after {}",
                        snap.snapshot_index, p.snapshot_index
                    )));
                }
                if snap.time_s < p.time_s {
                    return Err(Error::Schema(format!(
                        "snapshot {} is earlier ({}s) than snapshot {} ({}s)",
                        snap.snapshot_index, snap.time_s, p.snapshot_index, p.time_s
                    )));
                }
            }
            prev = Some(snap);
        }
    }

    Ok(EvaluationSample {
        sample_id: raw.sample_id,
        language,
        prompt: raw.prompt.unwrap_or_default(),
        env_spec: raw.env_spec.unwrap_or_default(),
        code,
        render_outcome: outcome,
        frames: raw.frames,
        snapshots: raw.snapshots,
    })
}

/// The funnel result for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleVerdict {
    pub sample_id: String,
    pub exec_pass: bool,
    pub error_category: Option<ErrorCategory>,
    pub render_time_min: Option<f64>,
    pub spatial_pass: Option<bool>,
    pub violations: Vec<SpatialViolation>,
    pub padvc_raw: Option<f64>,
    pub padvc_centered: Option<f64>,
    pub td_raw: Option<f64>,
    pub td_centered: Option<f64>,
    pub pvd: u64,
    pub text_expand: f64,
    /// Peak text-boundary energy; kept for the total-energy diagnostic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_text_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geo_energy_sum: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SampleVerdict {
    /// A verdict for a sample that never produced a video.
    pub fn exec_failure(sample_id: impl Into<String>, category: ErrorCategory) -> Self {
        Self {
            sample_id: sample_id.into(),
            exec_pass: false,
            error_category: Some(category),
            render_time_min: None,
            spatial_pass: None,
            violations: Vec::new(),
            padvc_raw: None,
            padvc_centered: None,
            td_raw: None,
            td_centered: None,
            pvd: 0,
            text_expand: 0.0,
            e_text_max: None,
            geo_energy_sum: None,
            notes: Vec::new(),
        }
    }

    /// A rendered sample with a spatial verdict and no dynamics yet.
    pub fn exec_success(sample_id: impl Into<String>, render_time_min: f64, spatial_pass: bool) -> Self {
        Self {
            sample_id: sample_id.into(),
            exec_pass: true,
            error_category: None,
            render_time_min: Some(render_time_min),
            spatial_pass: Some(spatial_pass),
            violations: Vec::new(),
            padvc_raw: None,
            padvc_centered: None,
            td_raw: None,
            td_centered: None,
            pvd: 0,
            text_expand: 0.0,
            e_text_max: None,
            geo_energy_sum: None,
            notes: Vec::new(),
        }
    }

    pub fn spatial_pass(&self) -> bool {
        self.exec_pass && self.spatial_pass == Some(true)
    }

    pub fn has_violation(&self, kind: crate::spatial::ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind && !v.suppressed)
    }
}
