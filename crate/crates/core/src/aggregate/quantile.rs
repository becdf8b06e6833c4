use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileBucket {
    pub index: usize,
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub pass_rate: f64,
}

/// Buckets ordered from lowest to highest metric value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileResult {
    pub metric: String,
    pub q: usize,
    pub buckets: Vec<QuantileBucket>,
}

fn by_value_then_id(a: &(&str, f64), b: &(&str, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0))
}

/// Equal-frequency pass rates. Input is `(sample_id, value, spatial_pass)`;
/// bucket sizes differ by at most one.
pub fn quantile_analysis(metric: &str, values: &[(String, f64, bool)], q: usize) -> Result<QuantileResult> {
    if q == 0 || values.len() < q {
        return Err(Error::TooFewSamples {
            needed: q.max(1),
            got: values.len(),
        });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        by_value_then_id(&(values[a].0.as_str(), values[a].1), &(values[b].0.as_str(), values[b].1))
    });
    let n = values.len();
    let buckets = (0..q)
        .map(|k| {
            let members = &order[k * n / q..(k + 1) * n / q];
            let passed = members.iter().filter(|&&i| values[i].2).count();
            QuantileBucket {
                index: k,
                n: members.len(),
                min: values[members[0]].1,
                max: values[members[members.len() - 1]].1,
                pass_rate: passed as f64 / members.len() as f64,
            }
        })
        .collect();
    Ok(QuantileResult {
        metric: metric.to_string(),
        q,
        buckets,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    pub sample_id: String,
    pub padvc_raw: f64,
    pub text_expand: f64,
    pub total_energy: f64,
    pub spatial_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRisk {
    pub n_samples: usize,
    pub top_frac: f64,
    /// Size of each top-fraction set.
    pub top_k: usize,
    /// Samples in both top sets.
    pub n: usize,
    pub fail_rate: Option<f64>,
    /// Failure rate of the `n` samples with the largest total energy.
    pub energy_fail_rate: Option<f64>,
}

fn top_ids<'a>(points: &'a [RiskPoint], k: usize, key: impl Fn(&RiskPoint) -> f64) -> Vec<&'a str> {
    let mut ranked: Vec<(&str, f64)> = points.iter().map(|p| (p.sample_id.as_str(), key(p))).collect();
    // Highest first; ties go to the smaller id.
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().take(k).map(|(id, _)| id).collect()
}

fn fail_rate<'a>(points: &[RiskPoint], ids: impl IntoIterator<Item = &'a str>) -> Option<f64> {
    let ids: BTreeSet<&str> = ids.into_iter().collect();
    if ids.is_empty() {
        return None;
    }
    let failed = points
        .iter()
        .filter(|p| ids.contains(p.sample_id.as_str()) && !p.spatial_pass)
        .count();
    Some(failed as f64 / ids.len() as f64)
}

/// Intersection of the top `top_frac` by PADVC and by TextExpand, compared
/// against the same number of samples ranked by total energy. An empty
/// intersection is reported with `n = 0`.
pub fn joint_risk_region(points: &[RiskPoint], top_frac: f64) -> Result<JointRisk> {
    if !(top_frac > 0.0 && top_frac < 1.0) {
        return Err(Error::Config(format!("top_frac must be in (0, 1), got {top_frac}")));
    }
    let k = (top_frac * points.len() as f64).ceil() as usize;
    let by_padvc: BTreeSet<&str> = top_ids(points, k, |p| p.padvc_raw).into_iter().collect();
    let joint: Vec<&str> = top_ids(points, k, |p| p.text_expand)
        .into_iter()
        .filter(|id| by_padvc.contains(id))
        .collect();
    let n = joint.len();
    Ok(JointRisk {
        n_samples: points.len(),
        top_frac,
        top_k: k,
        n,
        fail_rate: fail_rate(points, joint),
        energy_fail_rate: fail_rate(points, top_ids(points, n, |p| p.total_energy)),
    })
}
