//! Prints one pass/fail line per acceptance criterion.

use std::process::ExitCode;

use krein_kit::acceptance::run_all;

fn main() -> ExitCode {
    let reports = run_all(0, |r| {
        println!("{}", r.summary_line());
        for note in &r.notes {
            println!("    {note}");
        }
    });
    let failed: Vec<u32> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria passed", reports.len() - failed.len(), reports.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
