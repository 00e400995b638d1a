//! Runs the nine acceptance criteria and prints one PASS/FAIL line each.
//! Built without the libtest harness so the lines are never captured.

use std::process::ExitCode;

use fraczeta_core::acceptance::run_all;

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let results = match run_all(dir.path()) {
        Ok((results, _artifacts)) => results,
        Err(e) => {
            eprintln!("acceptance suite could not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if results.len() == 9 && failed.is_empty() {
        println!("acceptance: 9/9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of {} criteria failed: {failed:?}", failed.len(), results.len());
        ExitCode::FAILURE
    }
}
