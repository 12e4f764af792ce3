//! How close the closed-form noise scale lands to the bisected one.

use lap2::accountant::invert_noise;
use lap2::budget::Tolerance;
use lap2::config::MechanismConfig;
use lap2::optimizer::b_star_init;

fn main() -> lap2::error::Result<()> {
    println!("{:>7} {:>6} {:>6} {:>10} {:>10} {:>7}", "zeta", "T", "eps", "closed", "bisected", "ratio");
    for &(zeta, steps) in &[(0.001, 1000u64), (0.004, 5000), (0.01, 1000), (0.01, 10_000)] {
        for eps in [0.5, 1.0, 3.0] {
            let cfg = MechanismConfig::lap2(1.0, 1.0, zeta, steps, 1, 1e-5).with_lambda_max(1024);
            let init = b_star_init(1.0, eps, zeta, steps, 1e-5)?;
            let b = invert_noise(&cfg, eps, (1e-3, 1e3), Tolerance::Relative(1e-6), Some(init))?.noise_scale;
            println!("{zeta:>7} {steps:>6} {eps:>6} {init:>10.4} {b:>10.4} {:>7.3}", init / b);
        }
    }
    Ok(())
}
