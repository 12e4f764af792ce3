//! Runs the fast verification suite and prints one line per battery.

use lap2::verify::{run_suite, Suite};

fn main() -> lap2::error::Result<()> {
    let report = run_suite(Suite::Fast, 2024)?;
    for c in &report.checks {
        println!("{:<30} {:>5} cases, max error {:.2e}", c.name, c.cases, c.max_error);
    }
    let w = &report.worst_case_means;
    println!("worst mean pair on the grid {:?}, {:.3e} above (0, C)", w.argmax, w.gap);
    println!("all passed: {}", report.passed);
    Ok(())
}
