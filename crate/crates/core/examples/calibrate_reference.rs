//! Fits a log-space reference to raw scores and centers new scores on it.

use animeval::config::MetricConfig;
use animeval::dynamics::{center_score, fit_reference};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

fn main() -> animeval::Result<()> {
    let cfg = MetricConfig::default();
    let eps = cfg.epsilon_padvc;
    let shipped = cfg.padvc_ref.en;

    // Stand-in for raw scores of a human-authored reference set.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dist = LogNormal::new(shipped.mu, shipped.sigma).expect("positive sigma");
    let reference: Vec<f64> = (0..5000).map(|_| dist.sample(&mut rng)).collect();

    let fit = fit_reference(&reference, eps)?;
    println!("shipped mu {:.4} sigma {:.4}", shipped.mu, shipped.sigma);
    println!("fitted  mu {:.4} sigma {:.4}", fit.mu, fit.sigma);

    for raw in [0.001, 0.01, fit.mu.exp(), 0.5, 5.0] {
        println!("raw {raw:>8.4} -> centered {:.3}", center_score(raw, fit.mu, fit.sigma, eps));
    }
    Ok(())
}
