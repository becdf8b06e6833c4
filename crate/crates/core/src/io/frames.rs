use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::FrameSequence;
use crate::raster::GrayFrame;

/// Optional file next to the frames holding the frame rate.
pub const FPS_FILE: &str = "fps.txt";

const FRAME_EXTENSIONS: [&str; 4] = ["png", "pgm", "pnm", "ppm"];

/// One-based, zero-padded: `frame_000001.pgm`.
pub fn frame_file_name(index: usize) -> String {
    format!("frame_{:06}.pgm", index + 1)
}

fn decode(path: &Path) -> Result<GrayFrame> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => GrayFrame::new(w, h, buf.into_raw()),
        other => GrayFrame::from_rgb(w, h, other.to_rgb8().as_raw()),
    }
}

fn read_fps(dir: &Path, default_fps: f64) -> Result<f64> {
    let path = dir.join(FPS_FILE);
    match fs::read_to_string(&path) {
        Ok(text) => text
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|f| f.is_finite() && *f > 0.0)
            .ok_or_else(|| Error::Schema(format!("{}: invalid frame rate {:?}", path.display(), text.trim()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(default_fps),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Loads `frame_*` images in lexicographic order. Colour images are reduced
/// to BT.601 luma.
pub fn read_frames(dir: &Path, default_fps: f64) -> Result<FrameSequence> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        if name.starts_with("frame_") && FRAME_EXTENSIONS.contains(&ext.as_str()) {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Schema(format!("{}: no frame_* images", dir.display())));
    }
    let frames: Vec<GrayFrame> = paths.par_iter().map(|p| decode(p)).collect::<Result<_>>()?;
    FrameSequence::new(frames, read_fps(dir, default_fps)?, dir.display().to_string())
}

/// Writes binary PGM frames and `fps.txt`.
pub fn write_frames(dir: &Path, frames: &FrameSequence) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in frames.frames().iter().enumerate() {
        let path = dir.join(frame_file_name(i));
        image::save_buffer_with_format(
            &path,
            f.pixels(),
            f.width() as u32,
            f.height() as u32,
            image::ExtendedColorType::L8,
            ImageFormat::Pnm,
        )
        .map_err(|source| Error::Image { path: path.clone(), source })?;
    }
    let fps_path = dir.join(FPS_FILE);
    fs::write(&fps_path, format!("{}\n", frames.fps())).map_err(|e| Error::io(fps_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_one_based() {
        assert_eq!(frame_file_name(0), "frame_000001.pgm");
        assert_eq!(frame_file_name(122), "frame_000123.pgm");
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = GrayFrame::new(3, 2, vec![0, 10, 20, 30, 40, 255]).unwrap();
        let b = GrayFrame::filled(3, 2, 7);
        let seq = FrameSequence::new(vec![a, b], 12.5, "mem").unwrap();
        write_frames(dir.path(), &seq).unwrap();
        let back = read_frames(dir.path(), 15.0).unwrap();
        assert_eq!(back.frames(), seq.frames());
        assert_eq!(back.fps(), 12.5);
    }

    #[test]
    fn colour_png_uses_bt601() {
        let dir = tempfile::tempdir().unwrap();
        let rgb = [255u8, 0, 0, 0, 255, 0, 0, 0, 255];
        image::save_buffer(dir.path().join("frame_000001.png"), &rgb, 3, 1, image::ExtendedColorType::Rgb8).unwrap();
        let seq = read_frames(dir.path(), 15.0).unwrap();
        assert_eq!(seq.frames()[0].pixels(), &[76, 150, 29]);
        assert_eq!(seq.fps(), 15.0);
    }

    #[test]
    fn missing_and_mismatched_frames() {
        let dir = tempfile::tempdir().unwrap();
        assert!(read_frames(dir.path(), 15.0).is_err());
        image::save_buffer(dir.path().join("frame_000001.pgm"), &[0; 4], 2, 2, image::ExtendedColorType::L8).unwrap();
        image::save_buffer(dir.path().join("frame_000002.pgm"), &[0; 6], 3, 2, image::ExtendedColorType::L8).unwrap();
        assert!(matches!(read_frames(dir.path(), 15.0), Err(Error::Dimension { .. })));
    }
}
