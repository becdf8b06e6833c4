use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::MetricConfig;
use crate::error::{Error, Result};
use crate::model::SampleVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMode {
    /// One gap over all samples.
    Pooled,
    /// Mean of per-group gaps; groups resampled independently.
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub mean_gap_points: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub resamples: usize,
    pub n: usize,
    pub mode: GapMode,
}

/// Linear-interpolated quantile of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per-sample `exec - spatial` indicator, 0 or 1.
fn drops(verdicts: &[SampleVerdict]) -> Vec<u8> {
    verdicts
        .iter()
        .map(|v| u8::from(v.exec_pass && !v.spatial_pass()))
        .collect()
}

fn gap_points(drops: &[u8]) -> f64 {
    100.0 * drops.iter().map(|&d| f64::from(d)).sum::<f64>() / drops.len() as f64
}

fn resample_gap(drops: &[u8], rng: &mut ChaCha8Rng) -> f64 {
    let n = drops.len();
    let hits: u64 = (0..n).map(|_| u64::from(drops[rng.random_range(0..n)])).sum();
    100.0 * hits as f64 / n as f64
}

/// Resample `b` gets its own ChaCha stream, so results do not depend on how
/// rayon schedules the work.
fn bootstrap<F>(resamples: usize, seed: u64, stat: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let mut stats: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            stat(&mut rng)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    stats
}

fn interval(mean: f64, stats: &[f64]) -> (f64, f64) {
    let low = percentile(stats, 0.025).min(mean);
    let high = percentile(stats, 0.975).max(mean);
    (low, high)
}

/// Pooled execution-to-spatial gap in percentage points with a 95%
/// percentile-bootstrap interval over paired sample indicators.
pub fn exec_spatial_gap(verdicts: &[SampleVerdict], cfg: &MetricConfig) -> Result<GapResult> {
    if verdicts.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let d = drops(verdicts);
    let mean = gap_points(&d);
    let stats = bootstrap(cfg.bootstrap_resamples, cfg.bootstrap_seed, |rng| resample_gap(&d, rng));
    let (ci_low, ci_high) = interval(mean, &stats);
    Ok(GapResult {
        mean_gap_points: mean,
        ci_low,
        ci_high,
        resamples: cfg.bootstrap_resamples,
        n: verdicts.len(),
        mode: GapMode::Pooled,
    })
}

/// Unweighted mean of per-group gaps (one group per model or per
/// model-language pair), bootstrapped by resampling within each group.
pub fn exec_spatial_gap_macro(groups: &[Vec<SampleVerdict>], cfg: &MetricConfig) -> Result<GapResult> {
    if groups.is_empty() || groups.iter().any(Vec::is_empty) {
        return Err(Error::EmptyBatch);
    }
    let ds: Vec<Vec<u8>> = groups.iter().map(|g| drops(g)).collect();
    let k = ds.len() as f64;
    let mean = ds.iter().map(|d| gap_points(d)).sum::<f64>() / k;
    let stats = bootstrap(cfg.bootstrap_resamples, cfg.bootstrap_seed, |rng| {
        ds.iter().map(|d| resample_gap(d, rng)).sum::<f64>() / k
    });
    let (ci_low, ci_high) = interval(mean, &stats);
    Ok(GapResult {
        mean_gap_points: mean,
        ci_low,
        ci_high,
        resamples: cfg.bootstrap_resamples,
        n: groups.iter().map(Vec::len).sum(),
        mode: GapMode::Macro,
    })
}
