//! Runs the acceptance battery and prints one line per criterion.

use std::process::ExitCode;

fn main() -> ExitCode {
    let mut failed = 0;
    for id in 1..=ribbonsum::suite::CRITERIA.len() {
        let outcome = ribbonsum::suite::run_criterion(id);
        println!("{}", outcome.line());
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} of {} criteria passed", 10 - failed, 10);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
