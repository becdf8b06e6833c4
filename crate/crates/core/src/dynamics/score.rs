use super::events::AnimationEvent;
use crate::config::{MetricConfig, ReferenceFit};
use crate::error::{Error, Result};

/// Raw prompt-aware dynamic visual complexity.
///
/// `sum_k E_k^p / (ln(pvd + e) * (1 + text_max^p))`
pub fn padvc_raw(events: &[AnimationEvent], e_text_max: f64, pvd: u64, cfg: &MetricConfig) -> f64 {
    let energies: Vec<f64> = events.iter().map(|e| e.geo_energy).collect();
    padvc_from_energies(&energies, e_text_max, pvd, cfg.p)
}

pub fn padvc_from_energies(energies: &[f64], e_text_max: f64, pvd: u64, p: f64) -> f64 {
    let numerator: f64 = energies.iter().map(|e| e.powf(p)).sum();
    let density = (pvd as f64 + std::f64::consts::E).ln();
    numerator / (density * (1.0 + e_text_max.powf(p)))
}

/// Gaussian proximity of `ln(raw + eps)` to `mu`; 1 at the center.
pub fn center_score(raw: f64, mu: f64, sigma: f64, eps: f64) -> f64 {
    let z = ((raw + eps).ln() - mu) / sigma;
    (-0.5 * z * z).exp()
}

/// Mean and unbiased standard deviation of `ln(raw + eps)`.
pub fn fit_reference(raw_scores: &[f64], eps: f64) -> Result<ReferenceFit> {
    if raw_scores.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: raw_scores.len(),
        });
    }
    let logs: Vec<f64> = raw_scores.iter().map(|r| (r + eps).ln()).collect();
    if logs.iter().all(|&l| l == logs[0]) {
        return Err(Error::DegenerateFit);
    }
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / (n - 1.0);
    let sigma = var.sqrt();
    if !(sigma > 0.0 && mu.is_finite()) {
        return Err(Error::DegenerateFit);
    }
    Ok(ReferenceFit { mu, sigma })
}
