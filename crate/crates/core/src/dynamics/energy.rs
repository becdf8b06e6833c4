use super::ocr::TextMask;
use crate::error::Result;
use crate::raster::{gradient_l1_sum, GrayFrame};

/// Boundary energy of the text mask: sum of `|dx| + |dy|` of the 0/1 mask.
pub fn text_boundary_energy(mask: &TextMask) -> f64 {
    let m = &mask.mask;
    gradient_l1_sum(m.width(), m.height(), |i| i32::from(m.bits()[i]), |_| true) as f64
}

/// Structural energy of pixels newly brightened between an event's start and
/// end frames, outside the dilated text mask of the end frame.
pub fn geometric_event_energy(start: &GrayFrame, end: &GrayFrame, end_mask: &TextMask) -> Result<f64> {
    start.ensure_same_dims(end)?;
    let (w, h) = end.dims();
    let (s, e) = (start.pixels(), end.pixels());
    let dilated = end_mask.dilated.bits();
    let revealed = |i: usize| (i32::from(e[i]) - i32::from(s[i])).max(0);
    Ok(gradient_l1_sum(w, h, revealed, |i| dilated[i] == 0) as f64)
}
