//! Batch drivers behind the command-line subcommands: evaluate, calibrate,
//! filter, report and inventory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{
    build_analyses, exec_spatial_gap, render_report, rows_by_group, Analyses, GapResult, ModelRow,
    ReportFormat, TaggedVerdict,
};
use crate::config::MetricConfig;
use crate::dynamics::{center, fit_reference, raw_dynamics, NoText, PerFrameBoxes, TextDetector};
use crate::error::{Error, Result};
use crate::io::{self, BatchManifest, ManifestEntry, ARTIFACT_OCR, ARTIFACT_TIME, ARTIFACT_TRACE};
use crate::model::{validate_sample, EvaluationSample, Language, SampleVerdict};
use crate::reliability::{classify_failure, ApiInventory};
use crate::spatial::{spatial_pass, SpatialViolation};
use crate::text_analysis::{compute_pvd, extract_display_tokens, text_expand};

pub const VERDICTS_FILE: &str = "verdicts.jsonl";
pub const VIOLATIONS_FILE: &str = "violations.jsonl";

/// Exit codes of the external renderer.
pub const EXPORTER_OK: i32 = 0;
pub const EXPORTER_RENDER_FAILURE: i32 = 2;
pub const EXPORTER_TIMEOUT: i32 = 3;

/// Prefix of the note carried by verdicts whose artifacts could not be read.
pub const CORRUPT_NOTE: &str = "corrupt sample: ";

pub fn is_corrupt(v: &SampleVerdict) -> bool {
    v.notes.iter().any(|n| n.starts_with(CORRUPT_NOTE))
}

fn corrupt_verdict(sample_id: &str, err: &Error) -> SampleVerdict {
    let mut v = SampleVerdict::exec_failure(sample_id, crate::reliability::ErrorCategory::Other);
    v.error_category = None;
    v.notes.push(format!("{CORRUPT_NOTE}{err}"));
    v
}

/// Runs the funnel on one validated sample: execution gate, spatial audit,
/// then dynamics. Dynamics failures are noted without touching the spatial
/// verdict.
pub fn evaluate_sample(
    sample: &EvaluationSample,
    ocr: &dyn TextDetector,
    inventory: &ApiInventory,
    cfg: &MetricConfig,
) -> SampleVerdict {
    let outcome = &sample.render_outcome;
    if !outcome.is_success() {
        return SampleVerdict::exec_failure(&sample.sample_id, classify_failure(outcome, &sample.code, inventory));
    }
    let audit = spatial_pass(sample, cfg);
    let mut v = SampleVerdict::exec_success(
        &sample.sample_id,
        outcome.render_time_min.unwrap_or(0.0),
        audit.pass,
    );
    v.violations = audit.violations;

    let prompt = compute_pvd(&sample.prompt, sample.language, cfg);
    v.pvd = prompt.pvd();
    v.text_expand = text_expand(&extract_display_tokens(&sample.code, cfg), &prompt);

    match sample.frames.as_ref().map(|f| raw_dynamics(f, v.pvd, ocr, cfg)) {
        Some(Ok(raw)) => {
            let d = center(raw, v.pvd, sample.language, cfg);
            v.geo_energy_sum = Some(d.geo_energy_sum());
            v.padvc_raw = Some(d.padvc_raw);
            v.padvc_centered = Some(d.padvc_centered);
            v.td_raw = Some(d.td_raw);
            v.td_centered = Some(d.td_centered);
            v.e_text_max = Some(d.e_text_max);
        }
        Some(Err(e)) => v.notes.push(format!("dynamics unavailable: {e}")),
        None => v.notes.push("dynamics unavailable: no frames".into()),
    }
    v
}

/// OCR boxes recorded next to the artifacts, or no text when absent.
fn detector_for(entry: &ManifestEntry) -> Result<Box<dyn TextDetector>> {
    let path = entry.artifacts.join(ARTIFACT_OCR);
    if path.is_file() {
        Ok(Box::new(PerFrameBoxes::load(&path)?))
    } else {
        Ok(Box::new(NoText))
    }
}

fn load_sample(manifest: &BatchManifest, entry: &ManifestEntry, cfg: &MetricConfig) -> Result<EvaluationSample> {
    validate_sample(manifest.load_entry(entry, cfg.default_fps)?)
}

fn evaluate_entry(
    manifest: &BatchManifest,
    entry: &ManifestEntry,
    inventory: &ApiInventory,
    cfg: &MetricConfig,
) -> SampleVerdict {
    let result = load_sample(manifest, entry, cfg)
        .and_then(|s| detector_for(entry).map(|ocr| evaluate_sample(&s, ocr.as_ref(), inventory, cfg)));
    result.unwrap_or_else(|e| {
        warn!("{}: {e}", entry.sample_id);
        corrupt_verdict(&entry.sample_id, &e)
    })
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    b.build().map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// Invokes the external renderer for entries without artifacts. The command
/// receives the code path and the artifact directory as its last two
/// arguments.
pub fn render_missing(manifest: &BatchManifest, exporter: &[String]) -> Result<()> {
    let (program, args) = exporter
        .split_first()
        .ok_or_else(|| Error::Config("empty exporter command".into()))?;
    for entry in &manifest.entries {
        let dir = &entry.artifacts;
        if dir.join(ARTIFACT_TIME).exists() || dir.join(ARTIFACT_TRACE).exists() {
            continue;
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let status = Command::new(program)
            .args(args)
            .arg(&entry.code)
            .arg(dir)
            .status()
            .map_err(|e| Error::Command(format!("{program}: {e}")))?;
        match status.code() {
            Some(EXPORTER_OK) | Some(EXPORTER_RENDER_FAILURE) => {}
            Some(EXPORTER_TIMEOUT) => {
                let trace = dir.join(ARTIFACT_TRACE);
                let previous = fs::read_to_string(&trace).unwrap_or_default();
                if !previous.lines().any(|l| l.trim_start().starts_with("TIMEOUT")) {
                    fs::write(&trace, format!("TIMEOUT\n{previous}")).map_err(|e| Error::io(&trace, e))?;
                }
            }
            other => {
                return Err(Error::Command(format!(
                    "{program} exited with {other:?} for sample {:?}",
                    entry.sample_id
                )))
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutput {
    pub verdicts: Vec<TaggedVerdict>,
    pub rows: Vec<ModelRow>,
    pub gap: Option<GapResult>,
    pub analyses: Analyses,
}

/// Evaluates every manifest entry on a bounded pool. Output order is
/// `(model, language, sample_id)` regardless of scheduling.
pub fn run_evaluate(
    manifests: &[BatchManifest],
    inventory: &ApiInventory,
    cfg: &MetricConfig,
    jobs: Option<usize>,
) -> Result<EvaluateOutput> {
    let work: Vec<(&BatchManifest, &ManifestEntry)> = manifests
        .iter()
        .flat_map(|m| m.entries.iter().map(move |e| (m, e)))
        .collect();
    if work.is_empty() {
        return Err(Error::EmptyBatch);
    }
    info!("evaluating {} samples", work.len());
    let mut verdicts: Vec<TaggedVerdict> = pool(jobs)?.install(|| {
        work.par_iter()
            .map(|(m, e)| TaggedVerdict {
                model: m.model.clone(),
                language: m.language,
                verdict: evaluate_entry(m, e, inventory, cfg),
            })
            .collect()
    });
    verdicts.sort_by(|a, b| {
        (&a.model, a.language, &a.verdict.sample_id).cmp(&(&b.model, b.language, &b.verdict.sample_id))
    });
    let (rows, gap, analyses) = summarize(&verdicts, cfg)?;
    Ok(EvaluateOutput {
        verdicts,
        rows,
        gap,
        analyses,
    })
}

/// Rows, pooled gap and analyses over the non-corrupt verdicts.
pub fn summarize(
    verdicts: &[TaggedVerdict],
    cfg: &MetricConfig,
) -> Result<(Vec<ModelRow>, Option<GapResult>, Analyses)> {
    let usable: Vec<TaggedVerdict> = verdicts.iter().filter(|t| !is_corrupt(&t.verdict)).cloned().collect();
    if usable.is_empty() {
        return Ok((Vec::new(), None, Analyses::default()));
    }
    let rows = rows_by_group(&usable)?;
    let plain: Vec<SampleVerdict> = usable.iter().map(|t| t.verdict.clone()).collect();
    let gap = exec_spatial_gap(&plain, cfg)?;
    let analyses = build_analyses(&usable, 0.1)?;
    Ok((rows, Some(gap), analyses))
}

fn report_extension(format: ReportFormat) -> &'static str {
    match format {
        ReportFormat::TableText => "txt",
        ReportFormat::Delimited => "csv",
        ReportFormat::Structured => "json",
    }
}

/// Writes `verdicts.jsonl`, `violations.jsonl` and `report.<ext>` into `out`.
pub fn write_evaluation(out: &Path, result: &EvaluateOutput, format: ReportFormat) -> Result<PathBuf> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    io::write_jsonl(&out.join(VERDICTS_FILE), &result.verdicts)?;
    #[derive(Serialize)]
    struct Row<'a> {
        sample_id: &'a str,
        #[serde(flatten)]
        violation: &'a SpatialViolation,
    }
    let violations: Vec<Row> = result
        .verdicts
        .iter()
        .flat_map(|t| {
            t.verdict.violations.iter().map(|v| Row {
                sample_id: &t.verdict.sample_id,
                violation: v,
            })
        })
        .collect();
    io::write_jsonl(&out.join(VIOLATIONS_FILE), &violations)?;
    let report = out.join(format!("report.{}", report_extension(format)));
    let text = render_report(&result.rows, result.gap.as_ref(), &result.analyses, format)?;
    fs::write(&report, text).map_err(|e| Error::io(&report, e))?;
    Ok(report)
}

/// Re-renders a report from a verdicts file.
pub fn run_report(verdicts_path: &Path, cfg: &MetricConfig, format: ReportFormat) -> Result<String> {
    let verdicts: Vec<TaggedVerdict> = io::read_jsonl(verdicts_path)?;
    let (rows, gap, analyses) = summarize(&verdicts, cfg)?;
    render_report(&rows, gap.as_ref(), &analyses, format)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub language: Language,
    pub n: usize,
    pub padvc_mu: f64,
    pub padvc_sigma: f64,
    pub td_mu: f64,
    pub td_sigma: f64,
}

/// Fits both reference distributions per language from reference renders and
/// returns the updated config. Languages absent from the manifests keep
/// their previous fits.
pub fn run_calibrate(
    manifests: &[BatchManifest],
    cfg: &MetricConfig,
    jobs: Option<usize>,
) -> Result<(MetricConfig, Vec<CalibrationSummary>)> {
    let work: Vec<(&BatchManifest, &ManifestEntry)> = manifests
        .iter()
        .flat_map(|m| m.entries.iter().map(move |e| (m, e)))
        .collect();
    let raws: Vec<(Language, f64, f64)> = pool(jobs)?.install(|| {
        work.par_iter()
            .map(|(m, e)| {
                let sample = load_sample(m, e, cfg)?;
                let frames = sample.frames.as_ref().ok_or_else(|| {
                    Error::Schema(format!("reference {:?} did not render", e.sample_id))
                })?;
                let pvd = compute_pvd(&sample.prompt, sample.language, cfg).pvd();
                let raw = raw_dynamics(frames, pvd, detector_for(e)?.as_ref(), cfg)?;
                Ok((sample.language, raw.padvc_raw, raw.td_raw))
            })
            .collect::<Result<_>>()
    })?;
    let mut by_lang: BTreeMap<Language, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (lang, p, t) in raws {
        let entry = by_lang.entry(lang).or_default();
        entry.0.push(p);
        entry.1.push(t);
    }
    let mut out = cfg.clone();
    let mut summary = Vec::new();
    for (lang, (padvc, td)) in by_lang {
        let pfit = fit_reference(&padvc, cfg.epsilon_padvc)?;
        let td_eps = cfg.td_ref.get(lang).epsilon;
        let tfit = fit_reference(&td, td_eps)?;
        *out.padvc_ref.get_mut(lang) = pfit;
        let t = out.td_ref.get_mut(lang);
        t.mu = tfit.mu;
        t.sigma = tfit.sigma;
        summary.push(CalibrationSummary {
            language: lang,
            n: padvc.len(),
            padvc_mu: pfit.mu,
            padvc_sigma: pfit.sigma,
            td_mu: tfit.mu,
            td_sigma: tfit.sigma,
        });
    }
    if summary.is_empty() {
        return Err(Error::TooFewSamples { needed: 2, got: 0 });
    }
    out.validate()?;
    Ok((out, summary))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterResult {
    pub accepted: Vec<String>,
    /// `(sample_id, reason)`
    pub rejected: Vec<(String, String)>,
}

/// Hard filter: drops anything that failed to render or has an unsuppressed
/// violation in any snapshot.
pub fn run_filter(manifests: &[BatchManifest], cfg: &MetricConfig, jobs: Option<usize>) -> Result<FilterResult> {
    let work: Vec<(&BatchManifest, &ManifestEntry)> = manifests
        .iter()
        .flat_map(|m| m.entries.iter().map(move |e| (m, e)))
        .collect();
    let mut decisions: Vec<(String, Option<String>)> = pool(jobs)?.install(|| {
        work.par_iter()
            .map(|(m, e)| {
                let reason = match load_sample(m, e, cfg) {
                    Err(err) => Some(format!("unreadable: {err}")),
                    Ok(s) if !s.render_outcome.is_success() => Some("execution failed".to_string()),
                    Ok(s) => {
                        let audit = spatial_pass(&s, cfg);
                        audit.violations.iter().find(|v| !v.suppressed).map(|v| {
                            format!(
                                "{:?} at snapshot {} ({})",
                                v.kind,
                                v.snapshot_index,
                                v.object_ids.join(", ")
                            )
                        })
                    }
                };
                (e.sample_id.clone(), reason)
            })
            .collect()
    });
    decisions.sort();
    let mut result = FilterResult::default();
    for (id, reason) in decisions {
        match reason {
            None => result.accepted.push(id),
            Some(r) => result.rejected.push((id, r)),
        }
    }
    Ok(result)
}

/// Writes `accepted.txt` (one id per line) and `rejected.txt`
/// (`id<TAB>reason`).
pub fn write_filter(out: &Path, result: &FilterResult) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let accepted: String = result.accepted.iter().map(|id| format!("{id}\n")).collect();
    let rejected: String = result.rejected.iter().map(|(id, r)| format!("{id}\t{r}\n")).collect();
    for (name, text) in [("accepted.txt", accepted), ("rejected.txt", rejected)] {
        let path = out.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Runs the inventory generator and checks its output: non-empty, sorted,
/// one symbol per line, no duplicates.
pub fn run_inventory(command: &[String]) -> Result<ApiInventory> {
    let (program, args) = command
        .split_first()
        .ok_or_else(|| Error::Config("empty inventory command".into()))?;
    let out = Command::new(program)
        .args(args)
        .output()
        .map_err(|e| Error::Command(format!("{program}: {e}")))?;
    if !out.status.success() {
        return Err(Error::Command(format!(
            "{program} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| Error::Command(format!("non-UTF-8 output: {e}")))?;
    validate_inventory_text(&text)
}

pub fn validate_inventory_text(text: &str) -> Result<ApiInventory> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.iter().any(|l| l.trim().is_empty() || l.trim() != *l) {
        return Err(Error::Schema("inventory has blank or padded lines".into()));
    }
    if lines.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Schema("inventory is not strictly sorted".into()));
    }
    ApiInventory::new(lines)
}
