//! Evaluates a batch manifest end to end and writes verdicts and a report.
//!
//! cargo run --example evaluate_batch -- [manifest.toml] [out-dir]

use std::env;
use std::path::PathBuf;

use animeval::aggregate::ReportFormat;
use animeval::batch;
use animeval::config::MetricConfig;
use animeval::io::BatchManifest;
use animeval::reliability::ApiInventory;

fn main() -> animeval::Result<()> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut args = env::args().skip(1);
    let manifest = args.next().map(PathBuf::from).unwrap_or_else(|| fixtures.join("batch/manifest.toml"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| env::temp_dir().join("animeval-example"));

    let manifest = BatchManifest::load(&manifest)?;
    let inventory = ApiInventory::load(&fixtures.join("api_inventory.txt"))?;
    let cfg = MetricConfig { bootstrap_resamples: 1000, ..MetricConfig::default() };

    let result = batch::run_evaluate(&[manifest], &inventory, &cfg, None)?;
    for t in &result.verdicts {
        let v = &t.verdict;
        let stage = match (v.exec_pass, v.spatial_pass()) {
            (false, _) => format!("exec failed: {}", v.error_category.map(|c| c.label()).unwrap_or("?")),
            (true, false) => format!("{} layout violation(s)", v.violations.iter().filter(|x| !x.suppressed).count()),
            (true, true) => format!("pass, PADVC_c {:.3}", v.padvc_centered.unwrap_or(f64::NAN)),
        };
        println!("{:<4} {stage}", v.sample_id);
    }
    let report = batch::write_evaluation(&out, &result, ReportFormat::TableText)?;
    println!("\nreport written to {}", report.display());
    Ok(())
}
