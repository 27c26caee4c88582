//! Acceptance criteria 1–11 at full scale. Each test prints one
//! `PASS`/`FAIL` line and asserts.

use std::io::Write;
use std::time::Duration;

use takiff_toda::checks::{self, CheckOutcome, Scale, Status};

fn report(number: u32, outcome: &CheckOutcome, budget: Option<Duration>) {
    let within = budget.is_none_or(|b| outcome.seconds < b.as_secs_f64());
    let ok = outcome.status == Status::Pass && within;
    let timing = budget
        .map(|b| format!(" [budget {}s]", b.as_secs()))
        .unwrap_or_default();
    // Written to the raw handle so the line shows up without `--nocapture`.
    let line = format!(
        "{} criterion {number:>2} {}: {} ({:.2}s){timing}\n",
        if ok { "PASS" } else { "FAIL" },
        outcome.name,
        outcome.detail,
        outcome.seconds
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(outcome.status == Status::Pass, "criterion {number} failed: {}", outcome.detail);
    assert!(within, "criterion {number} exceeded its time budget");
}

#[test]
fn criterion_01_poisson_commutation() {
    report(1, &checks::poisson_commutation(&Scale::FULL), Some(Duration::from_secs(30)));
}

#[test]
fn criterion_02_lax_conservation() {
    report(2, &checks::lax_conservation(&Scale::FULL), Some(Duration::from_secs(60)));
}

#[test]
fn criterion_03_energy_conservation() {
    report(3, &checks::energy_conservation(&Scale::FULL), None);
}

#[test]
fn criterion_04_time_reversal() {
    report(4, &checks::time_reversal(&Scale::FULL), None);
}

#[test]
fn criterion_05_omega_block() {
    report(5, &checks::omega_blocks(&Scale::FULL), None);
}

#[test]
fn criterion_06_kostant_round_trip() {
    let (round_trip, _) = checks::kostant_round_trip(&Scale::FULL);
    report(6, &round_trip, Some(Duration::from_secs(60)));
}

#[test]
fn criterion_07_orbit_invariance() {
    let (_, orbit) = checks::kostant_round_trip(&Scale::FULL);
    report(7, &orbit, None);
}

#[test]
fn criterion_08_series_bound() {
    report(8, &checks::series_bound(&Scale::FULL), None);
}

#[test]
fn criterion_09_series_vs_integrator() {
    report(9, &checks::series_vs_integrator(&Scale::FULL), None);
}

#[test]
fn criterion_10_quartic_identity() {
    report(10, &checks::quartic_identity(&Scale::FULL), None);
}

#[test]
fn criterion_11_global_solvability() {
    report(11, &checks::global_solvability(&Scale::FULL), None);
}
