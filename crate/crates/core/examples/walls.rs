//! Privacy walls at three sampling rates: the inverted noise for each ε, the
//! log-log slope of that curve, and where the Gaussian δ first exceeds twice
//! the Lap2 δ.

use lap2::accountant::wall_diagnostics;
use lap2::budget::Tolerance;
use lap2::config::MechanismConfig;

fn main() -> lap2::error::Result<()> {
    let base = MechanismConfig::lap2(1.0, 1.0, 0.01, 1000, 1, 1e-5).with_lambda_max(256);
    let eps: Vec<f64> = (0..7).map(|i| 0.1 * 2f64.powi(i)).collect();
    let reports = wall_diagnostics(&base, &[1e-3, 1e-2, 1e-1], &eps, (1e-3, 1e4), Tolerance::Relative(1e-5))?;
    for rep in &reports {
        println!("q = {}  left wall at {:?}", rep.sampling_rate, rep.left_wall_epsilon);
        for r in &rep.rows {
            let f = |x: Option<f64>| x.map_or("-".into(), |v| format!("{v:.4e}"));
            println!(
                "  eps {:<6} b {:>11} sigma {:>11} W_R {:>11}/{:>11} delta {:>11}/{:>11}",
                r.epsilon,
                f(r.noise_lap2),
                f(r.noise_gaussian),
                f(r.w_r_lap2),
                f(r.w_r_gaussian),
                f(r.delta_lap2),
                f(r.delta_gaussian)
            );
        }
    }
    Ok(())
}
