//! Frame-level dynamics: temporal density, animation-event segmentation,
//! text-boundary and geometric event energies, PADVC, and the log-Gaussian
//! centered scores with their reference calibration.

mod energy;
mod events;
mod ocr;
mod score;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use energy::{geometric_event_energy, text_boundary_energy};
pub use events::{
    change_ratios, frame_change_ratio, segment_events, segment_ratios, temporal_density_raw,
    AnimationEvent,
};
pub use ocr::{NoText, PerFrameBoxes, StaticBoxes, TextBox, TextDetector, TextMask};
pub use score::{center_score, fit_reference, padvc_from_energies, padvc_raw};

use crate::config::MetricConfig;
use crate::error::{Error, Result};
use crate::model::{EvaluationSample, FrameSequence, Language};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsResult {
    pub padvc_raw: f64,
    pub padvc_centered: f64,
    pub td_raw: f64,
    pub td_centered: f64,
    pub e_text_max: f64,
    pub events: Vec<AnimationEvent>,
    pub pvd_used: u64,
}

impl DynamicsResult {
    pub fn geo_energy_sum(&self) -> f64 {
        self.events.iter().map(|e| e.geo_energy).sum()
    }
}

/// Raw scores only, before centering; what calibration consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDynamics {
    pub padvc_raw: f64,
    pub td_raw: f64,
    pub e_text_max: f64,
    pub events: Vec<AnimationEvent>,
}

fn text_mask_for(
    ocr: &dyn TextDetector,
    frames: &FrameSequence,
    index: usize,
    cfg: &MetricConfig,
) -> Result<TextMask> {
    let frame = &frames.frames()[index];
    let boxes = ocr
        .detect(index, frame)
        .map_err(|e| match e {
            Error::Ocr(_) => e,
            other => Error::Ocr(other.to_string()),
        })?;
    Ok(TextMask::from_boxes(frame.width(), frame.height(), &boxes, cfg.ocr_min_confidence))
}

/// Computes TD, events, energies and PADVC for one frame sequence.
///
/// OCR runs on every `text_sample_stride`-th frame and on every event end
/// frame; the peak text energy is taken over that set. Per-frame work is
/// parallel, reductions run in frame order.
pub fn raw_dynamics(
    frames: &FrameSequence,
    pvd: u64,
    ocr: &dyn TextDetector,
    cfg: &MetricConfig,
) -> Result<RawDynamics> {
    let ratios = change_ratios(frames, cfg.tau)?;
    let td_raw = events::temporal_density_from_ratios(&ratios, frames.fps());
    let mut events = segment_ratios(&ratios, cfg.event_activity_threshold, cfg.event_min_gap_frames);

    let mut sampled: BTreeSet<usize> = (0..frames.len()).step_by(cfg.text_sample_stride).collect();
    sampled.extend(events.iter().map(|e| e.end_frame));
    let masks: BTreeMap<usize, TextMask> = sampled
        .into_par_iter()
        .map(|i| text_mask_for(ocr, frames, i, cfg).map(|m| (i, m)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();

    let e_text_max = masks
        .values()
        .map(text_boundary_energy)
        .fold(0.0_f64, f64::max);

    let f = frames.frames();
    let energies: Vec<f64> = events
        .par_iter()
        .map(|ev| geometric_event_energy(&f[ev.start_frame], &f[ev.end_frame], &masks[&ev.end_frame]))
        .collect::<Result<_>>()?;
    for (ev, energy) in events.iter_mut().zip(energies) {
        ev.geo_energy = energy;
    }

    Ok(RawDynamics {
        padvc_raw: padvc_raw(&events, e_text_max, pvd, cfg),
        td_raw,
        e_text_max,
        events,
    })
}

/// Full dynamics for a rendered sample, centered against the sample
/// language's reference fits.
pub fn evaluate_dynamics(
    sample: &EvaluationSample,
    pvd: u64,
    ocr: &dyn TextDetector,
    cfg: &MetricConfig,
) -> Result<DynamicsResult> {
    let frames = sample.frames.as_ref().ok_or_else(|| {
        Error::Schema(format!("sample {:?} has no frames to measure", sample.sample_id))
    })?;
    let raw = raw_dynamics(frames, pvd, ocr, cfg)?;
    Ok(center(raw, pvd, sample.language, cfg))
}

pub fn center(raw: RawDynamics, pvd: u64, language: Language, cfg: &MetricConfig) -> DynamicsResult {
    let pref = cfg.padvc_ref.get(language);
    let tref = cfg.td_ref.get(language);
    DynamicsResult {
        padvc_centered: center_score(raw.padvc_raw, pref.mu, pref.sigma, cfg.epsilon_padvc),
        td_centered: center_score(raw.td_raw, tref.mu, tref.sigma, tref.epsilon),
        padvc_raw: raw.padvc_raw,
        td_raw: raw.td_raw,
        e_text_max: raw.e_text_max,
        events: raw.events,
        pvd_used: pvd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExecOutcome, SceneSnapshot};
    use crate::raster::GrayFrame;

    struct Broken;

    impl TextDetector for Broken {
        fn detect(&self, _: usize, _: &GrayFrame) -> Result<Vec<TextBox>> {
            Err(Error::Ocr("engine crashed".into()))
        }
    }

    fn sample(frames: Vec<GrayFrame>) -> EvaluationSample {
        EvaluationSample {
            sample_id: "s".into(),
            language: Language::En,
            prompt: String::new(),
            env_spec: String::new(),
            code: String::new(),
            render_outcome: ExecOutcome::success(0.1),
            frames: Some(FrameSequence::new(frames, 15.0, "mem").unwrap()),
            snapshots: Some(vec![SceneSnapshot::new("s", 0, 0.0)]),
        }
    }

    #[test]
    fn static_video_is_zero() {
        let cfg = MetricConfig::default();
        let r = evaluate_dynamics(&sample(vec![GrayFrame::filled(16, 16, 40); 12]), 3, &NoText, &cfg).unwrap();
        assert_eq!(r.padvc_raw, 0.0);
        assert_eq!(r.td_raw, 0.0);
        assert!(r.events.is_empty());
        let en = cfg.padvc_ref.en;
        assert_eq!(r.padvc_centered, center_score(0.0, en.mu, en.sigma, cfg.epsilon_padvc));
        assert!(r.padvc_centered > 0.0 && r.td_centered > 0.0);
    }

    #[test]
    fn all_text_video_has_no_geometric_energy() {
        let frames: Vec<GrayFrame> = (0..6u8).map(|i| GrayFrame::filled(16, 16, i * 40)).collect();
        let ocr = StaticBoxes(vec![TextBox::new(0.0, 0.0, 16.0, 16.0)]);
        let r = evaluate_dynamics(&sample(frames), 0, &ocr, &MetricConfig::default()).unwrap();
        assert!(!r.events.is_empty());
        assert_eq!(r.padvc_raw, 0.0);
    }

    #[test]
    fn ocr_failure_surfaces_as_ocr_error() {
        let frames: Vec<GrayFrame> = (0..4u8).map(|i| GrayFrame::filled(4, 4, i * 60)).collect();
        let err = evaluate_dynamics(&sample(frames), 0, &Broken, &MetricConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Ocr(_)));
    }

    #[test]
    fn square_appearing_counts_once() {
        let blank = GrayFrame::filled(32, 32, 0);
        let mut shown = blank.clone();
        for y in 10..20 {
            for x in 10..20 {
                shown.set(x, y, 200);
            }
        }
        let mut frames = vec![blank.clone(); 5];
        frames.extend(vec![shown; 5]);
        let r = evaluate_dynamics(&sample(frames), 0, &NoText, &MetricConfig::default()).unwrap();
        assert_eq!(r.events.len(), 1);
        assert_eq!((r.events[0].start_frame, r.events[0].end_frame), (4, 5));
        // 10x10 square of height 200: 40 boundary steps along each axis pair.
        assert_eq!(r.events[0].geo_energy, 200.0 * 40.0);
    }
}
