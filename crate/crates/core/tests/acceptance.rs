//! Acceptance criteria 1 to 11. Each test prints one PASS/FAIL line.
//! Criteria run one at a time so their timings are not distorted.

use std::sync::Mutex;

use homopolymer::acceptance::run_criterion;

static SERIAL: Mutex<()> = Mutex::new(());

fn check(id: u8) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let outcome = run_criterion(id).expect("known criterion");
    println!("{}", outcome.line());
    if !outcome.within_budget() {
        println!("criterion {id:>2} note: runtime above budget");
    }
    assert!(outcome.pass, "{}", outcome.line());
}

#[test]
fn criterion_01_resolvent_closed_form() {
    check(1);
}

#[test]
fn criterion_02_lyapunov_exponent() {
    check(2);
}

#[test]
fn criterion_03_critical_parameter() {
    check(3);
}

#[test]
fn criterion_04_partition_decay() {
    check(4);
}

#[test]
fn criterion_05_laplace_consistency() {
    check(5);
}

#[test]
fn criterion_06_return_kernel_asymptotics() {
    check(6);
}

#[test]
fn criterion_07_h_transform_consistency() {
    check(7);
}

#[test]
fn criterion_08_last_times_laws() {
    check(8);
}

#[test]
fn criterion_09_scaling_endpoints() {
    check(9);
}

#[test]
fn criterion_10_wetting() {
    check(10);
}

#[test]
fn criterion_11_property_suites() {
    check(11);
}
