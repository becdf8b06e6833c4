use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::MetricConfig;
use crate::error::{Error, Result};
use crate::model::FrameSequence;
use crate::raster::GrayFrame;

/// One detected animation event: frames `start_frame` (last still frame before
/// the motion) through `end_frame` (first still frame after it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnimationEvent {
    pub index: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub geo_energy: f64,
}

/// Fraction of pixels whose absolute difference strictly exceeds `tau`.
pub fn frame_change_ratio(prev: &GrayFrame, next: &GrayFrame, tau: f64) -> Result<f64> {
    prev.ensure_same_dims(next)?;
    let changed = prev
        .pixels()
        .iter()
        .zip(next.pixels())
        .filter(|(&a, &b)| f64::from(a.abs_diff(b)) > tau)
        .count();
    Ok(changed as f64 / prev.pixels().len() as f64)
}

/// Change ratio of every consecutive frame pair; entry `i` compares frames
/// `i` and `i + 1`.
pub fn change_ratios(frames: &FrameSequence, tau: f64) -> Result<Vec<f64>> {
    let f = frames.frames();
    if f.len() < 2 {
        return Err(Error::TooFewFrames {
            needed: 2,
            got: f.len(),
        });
    }
    f.par_windows(2)
        .map(|w| frame_change_ratio(&w[0], &w[1], tau))
        .collect()
}

/// `fps * mean(r_t)`: thresholded pixel change per second.
pub fn temporal_density_raw(frames: &FrameSequence, cfg: &MetricConfig) -> Result<f64> {
    let ratios = change_ratios(frames, cfg.tau)?;
    Ok(temporal_density_from_ratios(&ratios, frames.fps()))
}

pub(crate) fn temporal_density_from_ratios(ratios: &[f64], fps: f64) -> f64 {
    let sum: f64 = ratios.iter().sum();
    fps * (sum / ratios.len() as f64)
}

pub fn segment_events(frames: &FrameSequence, cfg: &MetricConfig) -> Result<Vec<AnimationEvent>> {
    let ratios = change_ratios(frames, cfg.tau)?;
    Ok(segment_ratios(&ratios, cfg.event_activity_threshold, cfg.event_min_gap_frames))
}

/// Groups active transitions (`r > threshold`) into events. Runs separated by
/// fewer than `min_gap` quiet transitions are merged. Energies are left at 0.
pub fn segment_ratios(ratios: &[f64], threshold: f64, min_gap: usize) -> Vec<AnimationEvent> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &r) in ratios.iter().enumerate() {
        if r <= threshold {
            continue;
        }
        match runs.last_mut() {
            Some((_, end)) if i - *end - 1 < min_gap => *end = i,
            _ => runs.push((i, i)),
        }
    }
    runs.into_iter()
        .enumerate()
        .map(|(index, (first, last))| AnimationEvent {
            index,
            start_frame: first,
            end_frame: last + 1,
            geo_energy: 0.0,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(frames: Vec<GrayFrame>, fps: f64) -> FrameSequence {
        FrameSequence::new(frames, fps, "mem").unwrap()
    }

    #[test]
    fn change_ratio_cases() {
        let a = GrayFrame::filled(4, 4, 0);
        assert_eq!(frame_change_ratio(&a, &a, 25.0).unwrap(), 0.0);
        assert_eq!(frame_change_ratio(&a, &GrayFrame::filled(4, 4, 255), 25.0).unwrap(), 1.0);
        assert_eq!(frame_change_ratio(&a, &GrayFrame::filled(4, 4, 25), 25.0).unwrap(), 0.0);
        assert_eq!(frame_change_ratio(&a, &GrayFrame::filled(4, 4, 26), 25.0).unwrap(), 1.0);
        assert!(matches!(
            frame_change_ratio(&a, &GrayFrame::filled(3, 4, 0), 25.0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn td_static_and_full_change() {
        let cfg = MetricConfig::default();
        let still = seq(vec![GrayFrame::filled(3, 3, 9); 5], 30.0);
        assert_eq!(temporal_density_raw(&still, &cfg).unwrap(), 0.0);
        let flicker = seq(
            (0..6).map(|i| GrayFrame::filled(3, 3, if i % 2 == 0 { 0 } else { 255 })).collect(),
            30.0,
        );
        assert_eq!(temporal_density_raw(&flicker, &cfg).unwrap(), 30.0);
    }

    #[test]
    fn td_alternating_ratio() {
        // Transitions change, hold, change, hold: mean ratio 0.5.
        let v = [0u8, 255, 255, 0, 0];
        let frames = seq(v.iter().map(|&x| GrayFrame::filled(2, 2, x)).collect(), 12.0);
        assert_eq!(temporal_density_raw(&frames, &MetricConfig::default()).unwrap(), 6.0);
    }

    #[test]
    fn td_needs_two_frames() {
        let one = seq(vec![GrayFrame::filled(2, 2, 0)], 10.0);
        assert!(matches!(
            temporal_density_raw(&one, &MetricConfig::default()),
            Err(Error::TooFewFrames { .. })
        ));
    }

    #[test]
    fn constant_video_has_no_events() {
        assert!(segment_ratios(&[0.0; 20], 0.01, 3).is_empty());
    }

    #[test]
    fn single_burst_is_one_event() {
        // Frames 0-9 still, 10-19 moving, 20-29 still on a new image: the
        // transitions into frames 10..=20 change.
        let mut r = vec![0.0; 29];
        for t in 10..=20 {
            r[t - 1] = 0.5;
        }
        let ev = segment_ratios(&r, 0.01, 3);
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].start_frame, ev[0].end_frame), (9, 20));
    }

    #[test]
    fn close_bursts_merge_far_bursts_split() {
        let mut r = vec![0.0; 30];
        r[5..8].fill(0.5);
        r[10..13].fill(0.5); // two quiet transitions between the bursts
        let merged = segment_ratios(&r, 0.01, 3);
        assert_eq!(merged.len(), 1);
        assert_eq!((merged[0].start_frame, merged[0].end_frame), (5, 13));

        let mut r = vec![0.0; 30];
        r[5..8].fill(0.5);
        r[11..13].fill(0.5); // three quiet transitions
        let split = segment_ratios(&r, 0.01, 3);
        assert_eq!(split.len(), 2);
        assert_eq!(split[1].index, 1);
    }

    #[test]
    fn threshold_is_strict() {
        assert!(segment_ratios(&[0.01, 0.01], 0.01, 3).is_empty());
    }
}
