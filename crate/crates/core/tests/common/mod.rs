#![allow(dead_code)]

use std::path::PathBuf;

use animeval::config::MetricConfig;
use animeval::dynamics::{TextBox, TextDetector};
use animeval::model::{BBox, CanvasSpec, ExecOutcome, FrameSequence, SceneObject, SceneSnapshot};
use animeval::raster::GrayFrame;
use animeval::reliability::ErrorCategory;
use animeval::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- traces

#[derive(Debug, Clone, Deserialize)]
pub struct TraceCase {
    pub id: String,
    pub category: ErrorCategory,
    pub trace: String,
    pub code: String,
    #[serde(default)]
    pub stdout_head: Option<String>,
}

impl TraceCase {
    pub fn outcome(&self, trace: &str) -> ExecOutcome {
        let o = ExecOutcome::failure(trace);
        match &self.stdout_head {
            Some(h) => o.with_stdout_head(h.clone()),
            None => o,
        }
    }
}

pub fn trace_cases() -> Vec<TraceCase> {
    let text = std::fs::read_to_string(fixture("traces.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

const NOISE: [&str; 6] = [
    "Manim Community v0.19.0",
    "[10/16/26 09:14:02] INFO     Animation 0 : Partial movie file written in '/tmp/media/videos/1.mp4'",
    "[10/16/26 09:14:03] INFO     Caching disabled.",
    "DEBUG: rendering frame 37 of 120",
    "Rendering scene...",
    "[progress] 41%|████      | 49/120",
];

/// Inserts log chatter before lines that start a new block (frame headers,
/// the traceback banner or the exception line), never between a frame
/// header and its source line.
pub fn with_noise(trace: &str, r: &mut ChaCha8Rng) -> String {
    let mut out = Vec::new();
    for line in trace.lines() {
        let block_start = !line.starts_with(char::is_whitespace) || line.trim_start().starts_with("File \"");
        if block_start && r.random_bool(0.5) {
            for _ in 0..r.random_range(1..3) {
                out.push(NOISE[r.random_range(0..NOISE.len())]);
            }
        }
        out.push(line);
    }
    if r.random_bool(0.5) {
        out.push(NOISE[r.random_range(0..NOISE.len())]);
    }
    out.join("\n") + "\n"
}

// ---------------------------------------------------------------- frames

/// A random sequence of still stretches and rectangle reveals, with
/// sub-threshold jitter on some frames.
pub fn random_sequence(r: &mut ChaCha8Rng, max_side: usize, max_frames: usize) -> FrameSequence {
    let w = r.random_range(4..=max_side);
    let h = r.random_range(4..=max_side);
    let n = r.random_range(2..=max_frames);
    let fps = [10.0, 12.0, 15.0, 24.0, 30.0][r.random_range(0..5)];
    let mut cur: Vec<u8> = (0..w * h).map(|_| r.random_range(0..40)).collect();
    let mut frames = Vec::with_capacity(n);
    for _ in 0..n {
        let roll: f64 = r.random();
        if roll < 0.3 {
            let (x0, y0) = (r.random_range(0..w), r.random_range(0..h));
            let (x1, y1) = (r.random_range(x0 + 1..=w), r.random_range(y0 + 1..=h));
            let v: u8 = r.random();
            for y in y0..y1 {
                for x in x0..x1 {
                    cur[y * w + x] = v;
                }
            }
        } else if roll < 0.45 {
            for p in cur.iter_mut() {
                *p = p.saturating_add(r.random_range(0..=20)).min(255);
            }
        }
        frames.push(GrayFrame::new(w, h, cur.clone()).unwrap());
    }
    FrameSequence::new(frames, fps, "synthetic").unwrap()
}

/// Boxes that move with the frame index, fractional edges included.
pub struct FakeOcr;

impl FakeOcr {
    pub fn boxes(index: usize, w: usize, h: usize) -> Vec<TextBox> {
        let mut out = Vec::new();
        if index % 3 != 2 {
            let x0 = (index * 5 % w) as f64 * 0.5;
            let y0 = (index * 3 % h) as f64 * 0.5;
            out.push(TextBox::new(x0 + 0.25, y0, x0 + w as f64 / 3.0, y0 + 2.6).with_confidence(0.9));
        }
        if index % 4 == 0 {
            out.push(TextBox::new(0.0, 0.0, w as f64, 1.0).with_confidence(0.3));
        }
        out
    }
}

impl TextDetector for FakeOcr {
    fn detect(&self, frame_index: usize, frame: &GrayFrame) -> Result<Vec<TextBox>> {
        Ok(Self::boxes(frame_index, frame.width(), frame.height()))
    }
}

/// Literal re-implementation of the frame metrics over nested vectors.
pub struct FrameOracle {
    pub td: f64,
    pub padvc: f64,
    pub events: Vec<(usize, usize, f64)>,
    pub e_text_max: f64,
}

fn px(f: &GrayFrame, x: usize, y: usize) -> i64 {
    f.pixels()[y * f.width() + x] as i64
}

fn grad_sum(w: usize, h: usize, v: impl Fn(usize, usize) -> i64, keep: impl Fn(usize, usize) -> bool) -> f64 {
    let mut s = 0i64;
    for y in 0..h {
        for x in 0..w {
            if !keep(x, y) {
                continue;
            }
            let dx = v((x + 1).min(w - 1), y) - v(x, y);
            let dy = v(x, (y + 1).min(h - 1)) - v(x, y);
            s += dx.abs() + dy.abs();
        }
    }
    s as f64
}

fn text_mask(boxes: &[TextBox], w: usize, h: usize, min_conf: f64) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; w]; h];
    for b in boxes.iter().filter(|b| b.confidence >= min_conf) {
        for (y, row) in m.iter_mut().enumerate() {
            for (x, cell) in row.iter_mut().enumerate() {
                let (xf, yf) = (x as f64, y as f64);
                if xf >= b.x0.floor() && xf < b.x1.ceil() && yf >= b.y0.floor() && yf < b.y1.ceil() {
                    *cell = true;
                }
            }
        }
    }
    m
}

/// Two passes of a 3x3 element: any set pixel within Chebyshev distance 2.
fn dilate2(m: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let (h, w) = (m.len() as i64, m[0].len() as i64);
    let mut out = vec![vec![false; w as usize]; h as usize];
    for y in 0..h {
        for x in 0..w {
            'search: for dy in -2..=2 {
                for dx in -2..=2 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && nx < w && ny < h && m[ny as usize][nx as usize] {
                        out[y as usize][x as usize] = true;
                        break 'search;
                    }
                }
            }
        }
    }
    out
}

pub fn frame_oracle(seq: &FrameSequence, pvd: u64, cfg: &MetricConfig) -> FrameOracle {
    let f = seq.frames();
    let (w, h) = seq.dims();
    let npx = (w * h) as f64;
    let ratios: Vec<f64> = (1..f.len())
        .map(|t| {
            let mut c = 0;
            for y in 0..h {
                for x in 0..w {
                    if ((px(&f[t], x, y) - px(&f[t - 1], x, y)).abs() as f64) > cfg.tau {
                        c += 1;
                    }
                }
            }
            c as f64 / npx
        })
        .collect();
    let td = seq.fps() * ratios.iter().sum::<f64>() / ratios.len() as f64;

    let active: Vec<usize> = (0..ratios.len()).filter(|&i| ratios[i] > cfg.event_activity_threshold).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for a in active {
        match groups.last_mut() {
            Some(g) if a - g[g.len() - 1] - 1 < cfg.event_min_gap_frames => g.push(a),
            _ => groups.push(vec![a]),
        }
    }
    let spans: Vec<(usize, usize)> = groups.iter().map(|g| (g[0], g[g.len() - 1] + 1)).collect();

    let mut sampled: Vec<usize> = (0..f.len()).filter(|i| i % cfg.text_sample_stride == 0).collect();
    sampled.extend(spans.iter().map(|s| s.1));
    let mask_of = |i: usize| text_mask(&FakeOcr::boxes(i, w, h), w, h, cfg.ocr_min_confidence);
    let e_text_max = sampled
        .iter()
        .map(|&i| {
            let m = mask_of(i);
            grad_sum(w, h, |x, y| m[y][x] as i64, |_, _| true)
        })
        .fold(0.0, f64::max);

    let events: Vec<(usize, usize, f64)> = spans
        .iter()
        .map(|&(s, e)| {
            let d = dilate2(&mask_of(e));
            let energy = grad_sum(w, h, |x, y| (px(&f[e], x, y) - px(&f[s], x, y)).max(0), |x, y| !d[y][x]);
            (s, e, energy)
        })
        .collect();
    let num: f64 = events.iter().map(|e| e.2.powf(cfg.p)).sum();
    let padvc = num / ((pvd as f64 + std::f64::consts::E).ln() * (1.0 + e_text_max.powf(cfg.p)));
    FrameOracle { td, padvc, events, e_text_max }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }
}

// ---------------------------------------------------------------- spatial

pub const CANVAS_W: f64 = 14.22;
pub const CANVAS_H: f64 = 8.0;

/// Boxes on a 0.01 grid, stored in integer cells alongside the scene.
pub struct GridScene {
    pub snapshot: SceneSnapshot,
    pub cells: Vec<[i64; 4]>,
}

const TAGS: [&str; 4] = ["highlight", "background", "grid_cell", "container"];

pub fn random_scene(r: &mut ChaCha8Rng, index: u64) -> GridScene {
    let n = r.random_range(1..=20);
    let mut snap = SceneSnapshot::new("scene", index, 0.0).with_canvas(CanvasSpec::new(CANVAS_W, CANVAS_H));
    let mut cells = Vec::new();
    for i in 0..n {
        let w = r.random_range(0..=300);
        let h = r.random_range(0..=300);
        let x0 = r.random_range(-880..=880 - w);
        let y0 = r.random_range(-550..=550 - h);
        let c = [x0, y0, x0 + w, y0 + h];
        let bbox = BBox::new(c[0] as f64 / 100.0, c[1] as f64 / 100.0, c[2] as f64 / 100.0, c[3] as f64 / 100.0);
        let mut obj = SceneObject::new(format!("o{i:02}"), "VMobject", bbox);
        if i > 0 && r.random_bool(0.35) {
            obj = obj.with_parent(format!("o{:02}", r.random_range(0..i)));
        }
        if r.random_bool(0.25) {
            obj = obj.with_tag(TAGS[r.random_range(0..TAGS.len())]);
        }
        let opacity = match r.random_range(0..10) {
            0 => 0.0,
            1 => 0.04,
            2 => 0.5,
            _ => 1.0,
        };
        snap.objects.push(obj.with_opacity(opacity));
        cells.push(c);
    }
    GridScene { snapshot: snap, cells }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleFlag {
    pub kind: &'static str,
    pub ids: Vec<String>,
    pub suppressed: Option<&'static str>,
}

/// Quantities compared against thresholds, for tangency screening.
pub struct SpatialOracle {
    pub flags: Vec<OracleFlag>,
    pub measured: Vec<(f64, f64)>,
}

fn cell_count(c: &[i64; 4]) -> i64 {
    (c[2] - c[0]).max(0) * (c[3] - c[1]).max(0)
}

/// Counts cells of `a` that also lie in `b` by visiting each cell of `a`.
fn shared_cells(a: &[i64; 4], b: &[i64; 4]) -> i64 {
    let mut n = 0;
    for y in a[1]..a[3] {
        if y < b[1] || y >= b[3] {
            continue;
        }
        for x in a[0]..a[2] {
            if x >= b[0] && x < b[2] {
                n += 1;
            }
        }
    }
    n
}

pub fn spatial_oracle(scene: &GridScene, cfg: &MetricConfig) -> SpatialOracle {
    let objs = &scene.snapshot.objects;
    let idx = |id: &str| objs.iter().position(|o| o.id == id).unwrap();
    let ancestors = |i: usize| {
        let mut out = Vec::new();
        let mut cur = objs[i].parent_id.clone();
        while let Some(p) = cur {
            let j = idx(&p);
            out.push(j);
            cur = objs[j].parent_id.clone();
        }
        out
    };
    let opacity = |i: usize| ancestors(i).iter().fold(objs[i].opacity, |o, &j| o * objs[j].opacity);
    let is_leaf = |i: usize| !objs.iter().any(|o| o.parent_id.as_deref() == Some(objs[i].id.as_str()));
    let mut flags = Vec::new();
    let mut measured = Vec::new();

    let canvas = [-711, -400, 711, 400];
    for i in 0..objs.len() {
        if !is_leaf(i) || cell_count(&scene.cells[i]) == 0 {
            continue;
        }
        let total = cell_count(&scene.cells[i]);
        let frac = (total - shared_cells(&scene.cells[i], &canvas)) as f64 / total as f64;
        measured.push((frac, cfg.oob_frac));
        if frac > cfg.oob_frac {
            flags.push(OracleFlag { kind: "OutOfBounds", ids: vec![objs[i].id.clone()], suppressed: None });
        }
    }

    for i in 0..objs.len() {
        for j in i + 1..objs.len() {
            if !is_leaf(i) || !is_leaf(j) || ancestors(i).contains(&j) || ancestors(j).contains(&i) {
                continue;
            }
            let (ai, aj) = (cell_count(&scene.cells[i]), cell_count(&scene.cells[j]));
            if ai == 0 || aj == 0 || opacity(i) <= 0.0 || opacity(j) <= 0.0 {
                continue;
            }
            let shared = shared_cells(&scene.cells[i], &scene.cells[j]);
            if shared == 0 {
                continue;
            }
            let ratio = shared as f64 / ai.min(aj) as f64;
            measured.push((ratio, cfg.overlap_area_frac));
            if ratio <= cfg.overlap_area_frac {
                continue;
            }
            let tag = |t: &str| objs[i].has_tag(t) || objs[j].has_tag(t);
            let grid_limit = 1.05 * cfg.grid_abutment_tol;
            let both_grid = objs[i].has_tag("grid_cell") && objs[j].has_tag("grid_cell");
            if both_grid {
                measured.push((ratio, grid_limit));
            }
            let suppressed = if tag("highlight") {
                Some("highlight")
            } else if tag("background") {
                Some("background")
            } else if both_grid && ratio <= grid_limit {
                Some("grid_adjacency")
            } else if opacity(i) <= cfg.suppress_opacity || opacity(j) <= cfg.suppress_opacity {
                Some("transparent")
            } else {
                None
            };
            flags.push(OracleFlag {
                kind: "Overlap",
                ids: vec![objs[i].id.clone(), objs[j].id.clone()],
                suppressed,
            });
        }
    }

    for i in 0..objs.len() {
        let Some(p) = objs[i].parent_id.as_deref() else { continue };
        let pj = idx(p);
        if !cfg.container_roles.iter().any(|role| objs[pj].has_tag(role)) {
            continue;
        }
        // Furthest child cell beyond each parent edge, in cells.
        let (c, pc) = (&scene.cells[i], &scene.cells[pj]);
        let mut worst = 0i64;
        for axis in 0..2 {
            let (lo, hi) = (c[axis], c[axis + 2]);
            if hi == lo {
                // A degenerate extent has no cells; measure the line itself.
                worst = worst.max(pc[axis] - lo).max(lo - pc[axis + 2]);
            }
            for v in lo..hi {
                worst = worst.max(pc[axis] - v).max(v + 1 - pc[axis + 2]);
            }
        }
        let exceed = worst as f64 / 100.0;
        measured.push((exceed, cfg.leak_margin));
        if exceed > cfg.leak_margin {
            flags.push(OracleFlag { kind: "Leakage", ids: vec![objs[i].id.clone()], suppressed: None });
        }
    }
    SpatialOracle { flags, measured }
}

/// A scene whose measured quantities all sit at least `gap` away from their
/// thresholds.
pub fn non_tangent_scene(r: &mut ChaCha8Rng, index: u64, cfg: &MetricConfig, gap: f64) -> (GridScene, SpatialOracle) {
    loop {
        let scene = random_scene(r, index);
        let oracle = spatial_oracle(&scene, cfg);
        if oracle.measured.iter().all(|(q, t)| (q - t).abs() >= gap) {
            return (scene, oracle);
        }
    }
}
