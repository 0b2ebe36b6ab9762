//! Runs every acceptance criterion, prints one line per criterion, then
//! checks that injected corruption is caught. Exits nonzero on any failure.

use std::process::ExitCode;

use homspace::acceptance::{run_all, run_criterion, AcceptanceOptions};

fn main() -> ExitCode {
    let mut ok = true;
    for o in run_all(&AcceptanceOptions { seed: 2024, inject_corruption: false }) {
        println!("{}", o.line());
        for r in o.records.iter().filter(|r| !r.passed()) {
            println!("      {}: value {:.3e}, threshold {:.3e}", r.name, r.value, r.threshold);
        }
        ok &= o.passed;
    }
    let injected = AcceptanceOptions { seed: 2024, inject_corruption: true };
    for id in [2, 3] {
        let o = run_criterion(id, &injected);
        let caught = !o.passed;
        println!(
            "{} {id:>2}  corrupted connection is caught by criterion {id}",
            if caught { "PASS" } else { "FAIL" }
        );
        ok &= caught;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
