use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::frames::{read_frames, write_frames};
use super::{read_snapshots, write_snapshots};
use crate::error::{Error, Result};
use crate::model::{EvaluationSample, ExecOutcome, Language, RawSample};

pub const ARTIFACT_TRACE: &str = "trace.txt";
pub const ARTIFACT_TIME: &str = "time.txt";
pub const ARTIFACT_STDOUT: &str = "stdout_head.txt";
pub const ARTIFACT_FRAMES: &str = "frames";
pub const ARTIFACT_SNAPSHOTS: &str = "snapshots.jsonl";
pub const ARTIFACT_OCR: &str = "ocr.jsonl";

fn read_optional(path: &Path) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn read_required(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads one sample's artifact directory. A non-empty `trace.txt` marks a
/// failed render; frames and snapshots are then ignored. Otherwise
/// `time.txt` (minutes) is required and frames and snapshots are loaded
/// when present.
pub fn load_artifacts(
    dir: &Path,
    sample_id: &str,
    language: Language,
    prompt: String,
    code: String,
    env_spec: String,
    default_fps: f64,
) -> Result<RawSample> {
    if !dir.is_dir() {
        return Err(Error::Schema(format!("artifact directory {} does not exist", dir.display())));
    }
    let stdout_head = read_optional(&dir.join(ARTIFACT_STDOUT))?;
    let trace = read_optional(&dir.join(ARTIFACT_TRACE))?.filter(|t| !t.trim().is_empty());
    let mut raw = RawSample {
        sample_id: sample_id.to_string(),
        language: Some(language),
        prompt: Some(prompt),
        env_spec: Some(env_spec),
        code: Some(code),
        ..RawSample::default()
    };
    let mut outcome = match trace {
        Some(trace) => ExecOutcome::failure(trace),
        None => {
            let path = dir.join(ARTIFACT_TIME);
            let text = read_required(&path)?;
            let minutes: f64 = text
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("{}: invalid render time {:?}", path.display(), text.trim())))?;
            let frames_dir = dir.join(ARTIFACT_FRAMES);
            if frames_dir.is_dir() {
                raw.frames = Some(read_frames(&frames_dir, default_fps)?);
            }
            let snaps = dir.join(ARTIFACT_SNAPSHOTS);
            if snaps.is_file() {
                raw.snapshots = Some(read_snapshots(&snaps)?);
            }
            ExecOutcome::success(minutes)
        }
    };
    if let Some(head) = stdout_head {
        outcome = outcome.with_stdout_head(head);
    }
    raw.outcome = Some(outcome);
    Ok(raw)
}

/// Writes the artifact layout for a sample; the inverse of `load_artifacts`.
pub fn write_artifacts(dir: &Path, sample: &EvaluationSample) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    };
    let outcome = &sample.render_outcome;
    if let Some(trace) = &outcome.trace {
        write(ARTIFACT_TRACE, trace)?;
    }
    if let Some(t) = outcome.render_time_min {
        write(ARTIFACT_TIME, &format!("{t}\n"))?;
    }
    if let Some(head) = &outcome.stdout_head {
        write(ARTIFACT_STDOUT, head)?;
    }
    if let Some(frames) = &sample.frames {
        write_frames(&dir.join(ARTIFACT_FRAMES), frames)?;
    }
    if let Some(snaps) = &sample.snapshots {
        write_snapshots(&dir.join(ARTIFACT_SNAPSHOTS), snaps)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub sample_id: String,
    pub prompt: PathBuf,
    pub code: PathBuf,
    pub artifacts: PathBuf,
}

/// One model's outputs for one language. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchManifest {
    pub model: String,
    pub language: Language,
    #[serde(default)]
    pub env_spec: String,
    pub entries: Vec<ManifestEntry>,
}

impl BatchManifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut m: BatchManifest =
            toml::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))?;
        if m.model.trim().is_empty() {
            return Err(Error::Config("manifest: model name is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for e in &mut m.entries {
            if e.sample_id.trim().is_empty() {
                return Err(Error::Config("manifest: empty sample_id".into()));
            }
            if !seen.insert(e.sample_id.clone()) {
                return Err(Error::Config(format!("manifest: duplicate sample_id {:?}", e.sample_id)));
            }
            for p in [&mut e.prompt, &mut e.code, &mut e.artifacts] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_required(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Reads prompt, code and artifacts for one entry.
    pub fn load_entry(&self, entry: &ManifestEntry, default_fps: f64) -> Result<RawSample> {
        let prompt = read_required(&entry.prompt)?;
        let code = read_required(&entry.code)?;
        load_artifacts(
            &entry.artifacts,
            &entry.sample_id,
            self.language,
            prompt,
            code,
            self.env_spec.clone(),
            default_fps,
        )
    }
}
