// Temporary numeric probe (deleted before finalization).
use std::time::Instant;

use mixnorm::harness::run_campaign;
use mixnorm::runconfig::{CheckKind, RunConfig};

fn time_one(kind: CheckKind) {
    let rc = RunConfig::default();
    let t0 = Instant::now();
    let out = run_campaign(kind, &rc).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "{:20} {:6.2}s  instances={:3} pass={:3} fail={:2} inconclusive={} c_emp={:.3} max_ratio={:.3} excluded={}",
        kind.id(),
        dt,
        out.summary.instances,
        out.summary.pass,
        out.summary.fail,
        out.summary.inconclusive,
        out.summary.c_emp,
        out.summary.max_ratio,
        out.summary.excluded,
    );
    if let Some(f) = out.first_failure() {
        println!("   FIRST FAIL: {}", f.to_json_line());
    }
}

#[test]
fn probe_hardy_polar() {
    time_one(CheckKind::HardyPolar);
}

#[test]
fn probe_convolution() {
    time_one(CheckKind::Convolution);
}

#[test]
fn probe_lp_trace() {
    time_one(CheckKind::LpTrace);
}

#[test]
fn probe_extension_bound() {
    time_one(CheckKind::ExtensionBound);
}

#[test]
fn probe_besov_trace() {
    time_one(CheckKind::BesovTrace);
}

#[test]
fn probe_besov_equivalence() {
    time_one(CheckKind::BesovEquivalence);
}
