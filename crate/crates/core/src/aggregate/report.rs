use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{joint_risk_region, quantile_analysis, GapResult, JointRisk, ModelRow, QuantileResult, RiskPoint, TaggedVerdict};
use crate::error::{Error, Result};
use crate::reliability::ErrorCategory;

pub const SCHEMA_VERSION: u32 = 1;

/// Label carried next to every total-energy figure.
pub const TOTAL_ENERGY_DEFINITION: &str = "sum of event geometric energies plus peak text energy";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    TableText,
    Delimited,
    Structured,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table-text" | "text" => Ok(ReportFormat::TableText),
            "delimited" | "csv" => Ok(ReportFormat::Delimited),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Analyses {
    pub deciles: Vec<QuantileResult>,
    pub quintiles: Vec<QuantileResult>,
    pub joint_risk: Option<JointRisk>,
}

/// Pooled analyses over executed samples that carry metrics. Tables that do
/// not have enough samples are left out.
pub fn build_analyses(tagged: &[TaggedVerdict], top_frac: f64) -> Result<Analyses> {
    let measured: Vec<_> = tagged
        .iter()
        .map(|t| &t.verdict)
        .filter(|v| v.exec_pass && v.padvc_raw.is_some())
        .collect();
    let column = |f: &dyn Fn(&crate::model::SampleVerdict) -> Option<f64>| -> Vec<(String, f64, bool)> {
        measured
            .iter()
            .filter_map(|v| f(v).map(|x| (v.sample_id.clone(), x, v.spatial_pass())))
            .collect()
    };
    let table = |name: &str, values: Vec<(String, f64, bool)>, q: usize| match quantile_analysis(name, &values, q) {
        Ok(r) => Ok(Some(r)),
        Err(Error::TooFewSamples { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let mut analyses = Analyses::default();
    analyses.deciles.extend(table("padvc_raw", column(&|v| v.padvc_raw), 10)?);
    analyses.deciles.extend(table("td_centered", column(&|v| v.td_centered), 10)?);
    analyses.quintiles.extend(table("text_expand", column(&|v| Some(v.text_expand)), 5)?);
    let points: Vec<RiskPoint> = measured
        .iter()
        .map(|v| RiskPoint {
            sample_id: v.sample_id.clone(),
            padvc_raw: v.padvc_raw.unwrap_or(0.0),
            text_expand: v.text_expand,
            total_energy: v.geo_energy_sum.unwrap_or(0.0) + v.e_text_max.unwrap_or(0.0),
            spatial_pass: v.spatial_pass(),
        })
        .collect();
    if !points.is_empty() {
        analyses.joint_risk = Some(joint_risk_region(&points, top_frac)?);
    }
    Ok(analyses)
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$}"))
}

fn err_pct(row: &ModelRow, c: ErrorCategory) -> f64 {
    row.error_pct.get(&c).copied().unwrap_or(0.0)
}

fn aligned(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    out.push_str(&line(header.to_vec()));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
}

const FUNNEL_HEADER: [&str; 10] = ["Lang", "Model", "Exec.", "Time", "PADVC", "TD", "Spatial", "Overlap", "Leak", "OOB."];
const ERROR_HEADER: [&str; 9] = [
    "Lang", "Model", "Exec. Fail", "Halluc.", "API Misuse", "Text Render", "Format", "Syntax", "Other",
];

fn funnel_cells(r: &ModelRow) -> Vec<String> {
    vec![
        r.language.to_string(),
        r.model.clone(),
        format!("{:.3}", r.exec),
        opt(r.time_min, 3),
        opt(r.padvc_c, 3),
        opt(r.td_c, 3),
        format!("{:.3}", r.spatial),
        format!("{:.3}", r.overlap_rate),
        format!("{:.3}", r.leak_rate),
        format!("{:.3}", r.oob_rate),
    ]
}

fn error_cells(r: &ModelRow) -> Vec<String> {
    let mut cells = vec![r.language.to_string(), r.model.clone(), format!("{:.1}", r.exec_fail_pct())];
    cells.extend(ErrorCategory::ALL.iter().map(|&c| format!("{:.1}", err_pct(r, c))));
    cells
}

fn quantile_cells(q: &QuantileResult) -> Vec<Vec<String>> {
    q.buckets
        .iter()
        .map(|b| {
            vec![
                q.metric.clone(),
                (b.index + 1).to_string(),
                b.n.to_string(),
                format!("{:.6}", b.min),
                format!("{:.6}", b.max),
                format!("{:.3}", b.pass_rate),
            ]
        })
        .collect()
}

fn table_text(rows: &[ModelRow], gap: Option<&GapResult>, a: &Analyses) -> String {
    let mut out = String::from("# Funnel\n");
    aligned(&mut out, &FUNNEL_HEADER, &rows.iter().map(funnel_cells).collect::<Vec<_>>());
    out.push_str("\n# Errors (% of samples)\n");
    aligned(&mut out, &ERROR_HEADER, &rows.iter().map(error_cells).collect::<Vec<_>>());
    out.push_str("\n# Exec-Spatial gap (points)\n");
    let gap_rows: Vec<Vec<String>> = gap
        .map(|g| {
            vec![vec![
                format!("{:?}", g.mode).to_lowercase(),
                g.n.to_string(),
                format!("{:.2}", g.mean_gap_points),
                format!("{:.2}", g.ci_low),
                format!("{:.2}", g.ci_high),
                g.resamples.to_string(),
            ]]
        })
        .unwrap_or_default();
    aligned(&mut out, &["Mode", "N", "Gap", "CI low", "CI high", "Resamples"], &gap_rows);
    let qheader = ["Metric", "Bucket", "N", "Min", "Max", "Spatial"];
    out.push_str("\n# Deciles\n");
    aligned(&mut out, &qheader, &a.deciles.iter().flat_map(quantile_cells).collect::<Vec<_>>());
    out.push_str("\n# Quintiles\n");
    aligned(&mut out, &qheader, &a.quintiles.iter().flat_map(quantile_cells).collect::<Vec<_>>());
    let _ = writeln!(out, "\n# Joint risk (total energy: {TOTAL_ENERGY_DEFINITION})");
    let jr: Vec<Vec<String>> = a
        .joint_risk
        .iter()
        .map(|j| {
            vec![
                j.n_samples.to_string(),
                format!("{}", j.top_frac),
                j.top_k.to_string(),
                j.n.to_string(),
                opt(j.fail_rate, 3),
                opt(j.energy_fail_rate, 3),
            ]
        })
        .collect();
    aligned(&mut out, &["N", "Top frac", "Top k", "Joint n", "Joint fail", "Energy fail"], &jr);
    out
}

fn csv_block(out: &mut Vec<u8>, section: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut full = vec!["section"];
    full.extend_from_slice(header);
    let to_err = |e: csv::Error| Error::Schema(format!("csv: {e}"));
    w.write_record(&full).map_err(to_err)?;
    for r in rows {
        let mut rec = vec![section.to_string()];
        rec.extend(r);
        w.write_record(&rec).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Schema(format!("csv: {e}")))?;
    if !out.is_empty() {
        out.push(b'\n');
    }
    out.extend(bytes);
    Ok(())
}

fn full(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn delimited(rows: &[ModelRow], gap: Option<&GapResult>, a: &Analyses) -> Result<String> {
    let mut out = Vec::new();
    let mut header = vec![
        "lang", "model", "n", "exec", "time_min", "padvc_c", "td_c", "spatial", "overlap", "leak", "oob", "exec_fail_pct",
    ];
    let cats: Vec<String> = ErrorCategory::ALL.iter().map(|c| format!("{c}_pct")).collect();
    header.extend(cats.iter().map(String::as_str));
    let row_cells = rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                r.language.to_string(),
                r.model.clone(),
                r.n.to_string(),
                r.exec.to_string(),
                full(r.time_min),
                full(r.padvc_c),
                full(r.td_c),
                r.spatial.to_string(),
                r.overlap_rate.to_string(),
                r.leak_rate.to_string(),
                r.oob_rate.to_string(),
                r.exec_fail_pct().to_string(),
            ];
            cells.extend(ErrorCategory::ALL.iter().map(|&c| err_pct(r, c).to_string()));
            cells
        })
        .collect();
    csv_block(&mut out, "rows", &header, row_cells)?;
    let gap_rows = gap
        .map(|g| {
            vec![vec![
                format!("{:?}", g.mode).to_lowercase(),
                g.n.to_string(),
                g.mean_gap_points.to_string(),
                g.ci_low.to_string(),
                g.ci_high.to_string(),
                g.resamples.to_string(),
            ]]
        })
        .unwrap_or_default();
    csv_block(&mut out, "gap", &["mode", "n", "mean_gap_points", "ci_low", "ci_high", "resamples"], gap_rows)?;
    let qrows = |qs: &[QuantileResult]| -> Vec<Vec<String>> {
        qs.iter()
            .flat_map(|q| {
                q.buckets.iter().map(move |b| {
                    vec![
                        q.metric.clone(),
                        b.index.to_string(),
                        b.n.to_string(),
                        b.min.to_string(),
                        b.max.to_string(),
                        b.pass_rate.to_string(),
                    ]
                })
            })
            .collect()
    };
    let qheader = ["metric", "bucket", "n", "min", "max", "pass_rate"];
    csv_block(&mut out, "deciles", &qheader, qrows(&a.deciles))?;
    csv_block(&mut out, "quintiles", &qheader, qrows(&a.quintiles))?;
    let jr = a
        .joint_risk
        .iter()
        .map(|j| {
            vec![
                j.n_samples.to_string(),
                j.top_frac.to_string(),
                j.top_k.to_string(),
                j.n.to_string(),
                full(j.fail_rate),
                full(j.energy_fail_rate),
            ]
        })
        .collect();
    csv_block(
        &mut out,
        "joint_risk",
        &["n_samples", "top_frac", "top_k", "n", "fail_rate", "energy_fail_rate"],
        jr,
    )?;
    String::from_utf8(out).map_err(|e| Error::Schema(e.to_string()))
}

#[derive(Serialize)]
struct StructuredReport<'a> {
    schema_version: u32,
    rows: &'a [ModelRow],
    gap: Option<&'a GapResult>,
    deciles: &'a [QuantileResult],
    quintiles: &'a [QuantileResult],
    joint_risk: Option<&'a JointRisk>,
    total_energy_definition: &'a str,
}

pub fn render_report(
    rows: &[ModelRow],
    gap: Option<&GapResult>,
    analyses: &Analyses,
    format: ReportFormat,
) -> Result<String> {
    match format {
        ReportFormat::TableText => Ok(table_text(rows, gap, analyses)),
        ReportFormat::Delimited => delimited(rows, gap, analyses),
        ReportFormat::Structured => {
            let doc = StructuredReport {
                schema_version: SCHEMA_VERSION,
                rows,
                gap,
                deciles: &analyses.deciles,
                quintiles: &analyses.quintiles,
                joint_risk: analyses.joint_risk.as_ref(),
                total_energy_definition: TOTAL_ENERGY_DEFINITION,
            };
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Schema(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn emit_report(
    rows: &[ModelRow],
    gap: Option<&GapResult>,
    analyses: &Analyses,
    format: ReportFormat,
    path: &Path,
) -> Result<()> {
    let text = render_report(rows, gap, analyses, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
