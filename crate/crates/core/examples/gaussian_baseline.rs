//! Subsampled Gaussian moments next to Lap2 at equal noise variance
//! (σ = b√2), and the two binomial conventions of the Gaussian bound.

use lap2::config::GaussianVariant;
use lap2::gaussian::alpha_gaussian;
use lap2::lap2::alpha_univariate;

fn main() -> lap2::error::Result<()> {
    let zeta = 0.01;
    println!("{:>4} {:>6} {:>13} {:>13} {:>13}", "b", "lambda", "lap2", "gaussian", "as printed");
    for b in [0.5, 1.0, 2.0] {
        let sigma = b * std::f64::consts::SQRT_2;
        for lambda in [2, 8, 32] {
            println!(
                "{b:>4} {lambda:>6} {:>13.6e} {:>13.6e} {:>13.6e}",
                alpha_univariate(zeta, 1.0 / b, lambda)?,
                alpha_gaussian(sigma, zeta, lambda, GaussianVariant::Normalized)?,
                alpha_gaussian(sigma, zeta, lambda, GaussianVariant::PaperExact)?
            );
        }
    }
    Ok(())
}
