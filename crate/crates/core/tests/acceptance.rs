//! Release gate: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use ideallab::acceptance::{run_criterion, Faults, CRITERIA};
use ideallab::config::RunConfig;

fn budget(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(60)),
        4 => Some(Duration::from_secs(30)),
        _ => None,
    }
}

#[test]
fn acceptance() {
    let cfg = RunConfig::default();
    let mut failed = Vec::new();
    for (id, name) in CRITERIA {
        let start = Instant::now();
        let mut r = run_criterion(id, &cfg, Faults::default());
        let took = start.elapsed();
        if let Some(limit) = budget(id) {
            if took >= limit {
                r.pass = false;
                r.detail = format!("took {took:.1?}, limit {limit:?}");
            }
        }
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {verdict} {name}: {} [{took:.2?}]",
            r.detail
        );
        if !r.pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn injected_fault_fails_criterion_two_only() {
    let cfg = RunConfig::default();
    let faults = Faults {
        corrupt_density: true,
    };
    let r = run_criterion(2, &cfg, faults);
    println!(
        "fault injection: criterion 2 {}: {}",
        if r.pass { "PASS" } else { "FAIL" },
        r.detail
    );
    assert!(!r.pass);
    assert!(run_criterion(9, &cfg, faults).pass);
}
