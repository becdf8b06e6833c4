//! Grayscale rasters, binary masks and the two pixel operators the dynamics
//! metrics are built from: the forward-difference gradient magnitude and
//! square-element dilation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An 8-bit grayscale raster stored row-major.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for GrayFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrayFrame")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Schema(format!(
                "raster must be non-empty, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Schema(format!(
                "raster buffer holds {} bytes, {width}x{height} needs {}",
                data.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("non-empty dimensions")
    }

    /// Converts interleaved RGB bytes using BT.601 luma, rounded to nearest.
    pub fn from_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::Schema(format!(
                "RGB buffer holds {} bytes, {width}x{height} needs {}",
                rgb.len(),
                width * height * 3
            )));
        }
        let data = rgb
            .chunks_exact(3)
            .map(|px| bt601_luma(px[0], px[1], px[2]))
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    pub(crate) fn ensure_same_dims(&self, other: &GrayFrame) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }
}

pub fn bt601_luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

/// A binary raster; every cell is 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] != 0
    }

    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.bits[y * self.width + x] = u8::from(on);
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn count_on(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }

    /// Sets every cell whose pixel index falls in `[x0, x1) x [y0, y1)`,
    /// clipped to the raster.
    pub fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64) {
        let cx0 = x0.clamp(0, self.width as i64) as usize;
        let cx1 = x1.clamp(0, self.width as i64) as usize;
        let cy0 = y0.clamp(0, self.height as i64) as usize;
        let cy1 = y1.clamp(0, self.height as i64) as usize;
        for y in cy0..cy1 {
            let row = &mut self.bits[y * self.width..(y + 1) * self.width];
            row[cx0..cx1].fill(1);
        }
    }

    /// Dilation by a `(2r+1)`-square structuring element, repeated `iterations`
    /// times. Cells outside the raster count as off.
    pub fn dilate(&self, radius: usize, iterations: usize) -> BinaryMask {
        let mut current = self.clone();
        for _ in 0..iterations {
            current = current.dilate_once(radius);
        }
        current
    }

    fn dilate_once(&self, radius: usize) -> BinaryMask {
        let (w, h) = (self.width, self.height);
        // Separable: horizontal pass then vertical pass.
        let mut horiz = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                let lo = x.saturating_sub(radius);
                let hi = (x + radius).min(w - 1);
                if self.bits[y * w + lo..=y * w + hi].iter().any(|&b| b != 0) {
                    horiz[y * w + x] = 1;
                }
            }
        }
        let mut out = vec![0u8; w * h];
        for y in 0..h {
            let lo = y.saturating_sub(radius);
            let hi = (y + radius).min(h - 1);
            for x in 0..w {
                if (lo..=hi).any(|yy| horiz[yy * w + x] != 0) {
                    out[y * w + x] = 1;
                }
            }
        }
        BinaryMask {
            width: w,
            height: h,
            bits: out,
        }
    }
}

/// Sums `|dx| + |dy|` of forward differences with replicate edge handling
/// over the pixels where `keep` is true.
///
/// `value(i)` yields the intensity at linear index `i` of a `width x height`
/// grid. The last column has `dx = 0` and the last row has `dy = 0`.
pub fn gradient_l1_sum<V, K>(width: usize, height: usize, value: V, keep: K) -> u64
where
    V: Fn(usize) -> i32,
    K: Fn(usize) -> bool,
{
    let mut total = 0u64;
    for y in 0..height {
        let row = y * width;
        for x in 0..width {
            let i = row + x;
            if !keep(i) {
                continue;
            }
            let v = value(i);
            let dx = if x + 1 < width { value(i + 1) - v } else { 0 };
            let dy = if y + 1 < height { value(i + width) - v } else { 0 };
            total += u64::from(dx.unsigned_abs()) + u64::from(dy.unsigned_abs());
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bt601_rounds_to_nearest() {
        assert_eq!(bt601_luma(0, 0, 0), 0);
        assert_eq!(bt601_luma(255, 255, 255), 255);
        // 0.299 * 255 = 76.245
        assert_eq!(bt601_luma(255, 0, 0), 76);
        // 0.587 * 255 = 149.685
        assert_eq!(bt601_luma(0, 255, 0), 150);
        assert_eq!(bt601_luma(0, 0, 255), 29);
    }

    #[test]
    fn rejects_wrong_buffer_length() {
        assert!(GrayFrame::new(2, 2, vec![0; 3]).is_err());
        assert!(GrayFrame::new(0, 2, vec![]).is_err());
        assert!(GrayFrame::from_rgb(1, 1, &[1, 2]).is_err());
    }

    #[test]
    fn single_pixel_gradient_is_four() {
        let mut m = BinaryMask::empty(5, 5);
        m.set(2, 2, true);
        let e = gradient_l1_sum(5, 5, |i| i32::from(m.bits()[i]), |_| true);
        assert_eq!(e, 4);
    }

    #[test]
    fn full_mask_has_no_gradient() {
        let mut m = BinaryMask::empty(4, 3);
        m.fill_rect(0, 0, 4, 3);
        assert_eq!(gradient_l1_sum(4, 3, |i| i32::from(m.bits()[i]), |_| true), 0);
    }

    #[test]
    fn dilation_grows_by_radius_times_iterations() {
        let mut m = BinaryMask::empty(11, 11);
        m.set(5, 5, true);
        let d = m.dilate(1, 2);
        assert_eq!(d.count_on(), 25);
        assert!(d.get(3, 3) && d.get(7, 7) && !d.get(2, 5));
    }

    #[test]
    fn dilation_clips_at_border() {
        let mut m = BinaryMask::empty(4, 4);
        m.set(0, 0, true);
        assert_eq!(m.dilate(1, 1).count_on(), 4);
    }
}
