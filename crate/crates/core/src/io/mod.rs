//! On-disk formats: JSON-lines records, snapshot files, numbered frame
//! directories, per-sample artifact directories and batch manifests.

mod artifacts;
mod frames;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub use artifacts::{
    load_artifacts, write_artifacts, BatchManifest, ManifestEntry, ARTIFACT_FRAMES, ARTIFACT_OCR,
    ARTIFACT_SNAPSHOTS, ARTIFACT_STDOUT, ARTIFACT_TIME, ARTIFACT_TRACE,
};
pub use frames::{frame_file_name, read_frames, write_frames, FPS_FILE};

use crate::error::{Error, Result};
use crate::model::SceneSnapshot;

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })
        })
        .collect()
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::Schema(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let text = to_jsonl(records)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// One snapshot per line; every snapshot is validated on read.
pub fn read_snapshots(path: &Path) -> Result<Vec<SceneSnapshot>> {
    let snapshots: Vec<SceneSnapshot> = read_jsonl(path)?;
    for s in &snapshots {
        s.validate()?;
    }
    Ok(snapshots)
}

pub fn write_snapshots(path: &Path, snapshots: &[SceneSnapshot]) -> Result<()> {
    write_jsonl(path, snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BBox, SceneObject};

    #[test]
    fn snapshot_field_set_is_exact() {
        let snap = SceneSnapshot::new("s1", 0, 0.0).with_object(
            SceneObject::new("a", "Circle", BBox::new(-1.0, -1.0, 1.0, 1.0)).with_tag("highlight"),
        );
        let line = to_jsonl(&[snap]).unwrap();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["canvas", "objects", "sample_id", "snapshot_index", "time_s"]);
        let canvas: Vec<&str> = v["canvas"].as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(canvas, ["height", "width"]);
        let obj = v["objects"][0].as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            ["bbox", "id", "is_text", "opacity", "parent_id", "role_tags", "type_name", "z_index"]
        );
        assert!(obj["parent_id"].is_null());
    }

    #[test]
    fn snapshots_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snapshots.jsonl");
        let snaps = vec![
            SceneSnapshot::new("s", 0, 0.0),
            SceneSnapshot::new("s", 1, 1.5).with_object(
                SceneObject::new("p", "Polygon", BBox::new(0.0, 0.0, 1.0, 1.0)).with_points(vec![[0.0, 0.0], [1.0, 1.0]]),
            ),
        ];
        write_snapshots(&path, &snaps).unwrap();
        assert_eq!(read_snapshots(&path).unwrap(), snaps);
    }

    #[test]
    fn bad_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        fs::write(&path, "{}\n\nnot json\n").unwrap();
        match read_jsonl::<serde_json::Value>(&path) {
            Err(Error::Json { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
