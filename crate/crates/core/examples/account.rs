//! ε at δ = 1e-5 for each mechanism on one training configuration.

use lap2::accountant::privacy_report;
use lap2::config::{Mechanism, MechanismConfig};

fn main() -> lap2::error::Result<()> {
    // 26K-parameter model, batch rate 0.0043, 5860 steps.
    let base = MechanismConfig::lap2(1.0, 2.0, 0.0043, 5860, 26_000, 1e-5).with_lambda_max(512);
    println!("{:<14} {:>12} {:>8} {:>10}", "mechanism", "epsilon", "lambda*", "mode");
    for m in [Mechanism::Lap2, Mechanism::LaplaceL1, Mechanism::Gaussian, Mechanism::PureLaplace] {
        let r = privacy_report(&base.clone().with_mechanism(m))?;
        let lambda = r.lambda_star.map_or("-".to_string(), |l| l.to_string());
        println!("{:<14} {:>12.6} {:>8} {:>10}", m.name(), r.epsilon, lambda, r.mode.name());
    }
    Ok(())
}
