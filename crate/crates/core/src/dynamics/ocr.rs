//! Text detection boundary. The metric core only needs "raster in, text boxes
//! out"; any OCR engine can sit behind [`TextDetector`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayFrame};

/// Axis-aligned text box in pixel coordinates; `x1`/`y1` are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub confidence: f64,
}

impl TextBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            x0,
            y0,
            x1,
            y1,
            confidence: 1.0,
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }
}

pub trait TextDetector: Sync {
    /// Detects text in one frame. `frame_index` is the frame's position in
    /// its sequence, for backends that replay precomputed results.
    fn detect(&self, frame_index: usize, frame: &GrayFrame) -> Result<Vec<TextBox>>;
}

/// Reports no text anywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoText;

impl TextDetector for NoText {
    fn detect(&self, _: usize, _: &GrayFrame) -> Result<Vec<TextBox>> {
        Ok(Vec::new())
    }
}

/// Reports the same boxes on every frame.
#[derive(Debug, Clone, Default)]
pub struct StaticBoxes(pub Vec<TextBox>);

impl TextDetector for StaticBoxes {
    fn detect(&self, _: usize, _: &GrayFrame) -> Result<Vec<TextBox>> {
        Ok(self.0.clone())
    }
}

/// Replays per-frame boxes, e.g. from an offline OCR pass. Frames without an
/// entry have no text.
#[derive(Debug, Clone, Default)]
pub struct PerFrameBoxes {
    boxes: BTreeMap<usize, Vec<TextBox>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OcrRecord {
    frame: usize,
    boxes: Vec<TextBox>,
}

impl PerFrameBoxes {
    pub fn new(boxes: BTreeMap<usize, Vec<TextBox>>) -> Self {
        Self { boxes }
    }

    /// Reads `ocr.jsonl`: one `{"frame": i, "boxes": [...]}` record per line,
    /// frame indices zero-based.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut boxes = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: OcrRecord = serde_json::from_str(line).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })?;
            boxes.entry(rec.frame).or_insert_with(Vec::new).extend(rec.boxes);
        }
        Ok(Self { boxes })
    }
}

impl TextDetector for PerFrameBoxes {
    fn detect(&self, frame_index: usize, _: &GrayFrame) -> Result<Vec<TextBox>> {
        Ok(self.boxes.get(&frame_index).cloned().unwrap_or_default())
    }
}

/// Text coverage of one frame: the raw box mask and its dilation.
#[derive(Debug, Clone, PartialEq)]
pub struct TextMask {
    pub mask: BinaryMask,
    pub dilated: BinaryMask,
}

pub const DILATION_RADIUS: usize = 1;
pub const DILATION_ITERATIONS: usize = 2;

impl TextMask {
    /// Rasterizes the boxes at or above `min_confidence`. A pixel is covered
    /// when its index lies in `[floor(x0), ceil(x1)) x [floor(y0), ceil(y1))`.
    /// The dilated mask uses a 3x3 square element applied twice.
    pub fn from_boxes(width: usize, height: usize, boxes: &[TextBox], min_confidence: f64) -> Self {
        let mut mask = BinaryMask::empty(width, height);
        for b in boxes.iter().filter(|b| b.confidence >= min_confidence) {
            mask.fill_rect(
                b.x0.floor() as i64,
                b.y0.floor() as i64,
                b.x1.ceil() as i64,
                b.y1.ceil() as i64,
            );
        }
        let dilated = mask.dilate(DILATION_RADIUS, DILATION_ITERATIONS);
        Self { mask, dilated }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            mask: BinaryMask::empty(width, height),
            dilated: BinaryMask::empty(width, height),
        }
    }
}
