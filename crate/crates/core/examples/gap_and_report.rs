//! Aggregates verdicts into funnel rows, bootstraps the execution-spatial
//! gap and prints the table report.

use animeval::aggregate::{build_analyses, exec_spatial_gap, render_report, rows_by_group, ReportFormat, TaggedVerdict};
use animeval::config::MetricConfig;
use animeval::reliability::ErrorCategory;
use animeval::{Language, SampleVerdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> animeval::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tagged = Vec::new();
    for (model, exec_p, spatial_p) in [("model-a", 0.95, 0.35), ("model-b", 0.55, 0.25)] {
        for lang in Language::ALL {
            for i in 0..300 {
                let id = format!("{model}-{lang}-{i:03}");
                let verdict = if rng.random_bool(exec_p) {
                    let mut v = SampleVerdict::exec_success(id, rng.random_range(0.1..0.6), rng.random_bool(spatial_p / exec_p));
                    v.padvc_raw = Some(rng.random_range(0.0..1.0));
                    v.td_centered = Some(rng.random_range(0.0..1.0));
                    v.text_expand = rng.random_range(0.0..3.0);
                    v.geo_energy_sum = Some(rng.random_range(0.0..1e5));
                    v.e_text_max = Some(rng.random_range(0.0..1e4));
                    v
                } else {
                    let c = ErrorCategory::ALL[rng.random_range(0..ErrorCategory::ALL.len())];
                    SampleVerdict::exec_failure(id, c)
                };
                tagged.push(TaggedVerdict { model: model.into(), language: lang, verdict });
            }
        }
    }

    let cfg = MetricConfig { bootstrap_resamples: 2000, ..MetricConfig::default() };
    let rows = rows_by_group(&tagged)?;
    let all: Vec<SampleVerdict> = tagged.iter().map(|t| t.verdict.clone()).collect();
    let gap = exec_spatial_gap(&all, &cfg)?;
    let analyses = build_analyses(&tagged, 0.1)?;
    print!("{}", render_report(&rows, Some(&gap), &analyses, ReportFormat::TableText)?);
    Ok(())
}
