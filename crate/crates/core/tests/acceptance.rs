//! Acceptance suite. Runs every criterion and prints one verdict line each.
//!
//! `cargo test -p burgers-fsi --test acceptance -- 3 9` runs only criteria 3
//! and 9.

use std::process::ExitCode;
use std::time::Instant;

use burgers_fsi::suite;

fn main() -> ExitCode {
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let start = Instant::now();
    let reports: Vec<_> = if selected.is_empty() {
        suite::run_all()
    } else {
        suite::run_all_of(&selected)
    };

    println!();
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!(
        "\nacceptance: {} passed, {failed} failed ({:.1}s)",
        reports.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
