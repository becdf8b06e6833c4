//! Frame-level dynamics of a synthetic clip: events, temporal density and
//! the text-discounted complexity score.

use animeval::config::MetricConfig;
use animeval::dynamics::{center, raw_dynamics, StaticBoxes, TextBox};
use animeval::model::{FrameSequence, Language};
use animeval::raster::GrayFrame;

fn clip() -> FrameSequence {
    let (w, h) = (160, 90);
    let mut frames = Vec::new();
    for i in 0..60 {
        let mut f = GrayFrame::filled(w, h, 16);
        // Static caption across the top.
        for y in 6..16 {
            for x in 30..130 {
                f.set(x, y, 235);
            }
        }
        // A square slides right for 20 frames, holds, then grows.
        let (x0, side) = match i {
            0..=19 => (10 + i * 4, 20),
            20..=34 => (90, 20),
            _ => (90, 20 + (i - 35).min(15)),
        };
        for y in 40..40 + side {
            for x in x0..(x0 + side).min(w) {
                f.set(x, y.min(h - 1), 180);
            }
        }
        frames.push(f);
    }
    FrameSequence::new(frames, 15.0, "synthetic").expect("frames share dimensions")
}

fn main() -> animeval::Result<()> {
    let cfg = MetricConfig::default();
    let seq = clip();
    let ocr = StaticBoxes(vec![TextBox::new(30.0, 6.0, 130.0, 16.0)]);
    let pvd = 3;

    let raw = raw_dynamics(&seq, pvd, &ocr, &cfg)?;
    for e in &raw.events {
        println!("event frames {:>2}..{:>2}  geometric energy {:>8.0}", e.start_frame, e.end_frame, e.geo_energy);
    }
    let scored = center(raw, pvd, Language::En, &cfg);
    println!("peak text energy {:.0}", scored.e_text_max);
    println!("TD    raw {:.4}  centered {:.3}", scored.td_raw, scored.td_centered);
    println!("PADVC raw {:.4}  centered {:.3}", scored.padvc_raw, scored.padvc_centered);
    Ok(())
}
