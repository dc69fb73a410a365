//! One line per acceptance criterion. Failures are reported, not fatal.

use difftomo_cli::verify::{run, VerifyOptions};

fn main() {
    let only = std::env::var("DIFFTOMO_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect::<Vec<u8>>());
    let results = run(&VerifyOptions { only, workdir: None }, |r, secs| println!("{} ({secs:.1} s)", r.line()));
    let passed = results.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed} of {} criteria passed", results.len());
}
