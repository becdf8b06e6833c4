mod common;

use std::collections::BTreeMap;

use animeval::reliability::{classify_failure, error_breakdown, ApiInventory, ErrorCategory};
use animeval::SampleVerdict;
use common::{fixture, rng, trace_cases, with_noise};

fn inventory() -> ApiInventory {
    ApiInventory::load(&fixture("api_inventory.txt")).unwrap()
}

#[test]
fn fixture_has_five_per_category() {
    let mut counts: BTreeMap<ErrorCategory, usize> = BTreeMap::new();
    for c in trace_cases() {
        *counts.entry(c.category).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    assert!(counts.values().all(|&n| n == 5), "{counts:?}");
}

#[test]
fn every_fixture_trace_lands_in_its_category() {
    let inv = inventory();
    let wrong: Vec<String> = trace_cases()
        .iter()
        .filter_map(|c| {
            let got = classify_failure(&c.outcome(&c.trace), &c.code, &inv);
            (got != c.category).then(|| format!("{}: expected {:?}, got {got:?}", c.id, c.category))
        })
        .collect();
    assert!(wrong.is_empty(), "{wrong:#?}");
}

#[test]
fn log_chatter_does_not_move_traces() {
    let inv = inventory();
    let mut r = rng(21);
    for c in trace_cases() {
        for _ in 0..10 {
            let noisy = with_noise(&c.trace, &mut r);
            assert_eq!(classify_failure(&c.outcome(&noisy), &c.code, &inv), c.category, "{}:\n{noisy}", c.id);
        }
    }
}

#[test]
fn breakdown_of_fixture_batch() {
    let inv = inventory();
    let mut verdicts: Vec<SampleVerdict> = trace_cases()
        .iter()
        .map(|c| SampleVerdict::exec_failure(&c.id, classify_failure(&c.outcome(&c.trace), &c.code, &inv)))
        .collect();
    verdicts.extend((0..30).map(|i| SampleVerdict::exec_success(format!("ok{i}"), 0.2, true)));
    let pct = error_breakdown(&verdicts).unwrap();
    let total: f64 = pct.values().sum();
    assert!((total - 50.0).abs() < 1e-9);
    assert!(pct.values().all(|&p| (p - 50.0 / 6.0).abs() < 1e-9));
}
