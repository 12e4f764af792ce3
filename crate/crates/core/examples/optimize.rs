//! Clip and noise selection for a target ε, next to the closed-form start.

use lap2::config::MechanismConfig;
use lap2::optimizer::{b_star_init, optimize_parameters, rho_star, SearchSpec};

fn main() -> lap2::error::Result<()> {
    let base = MechanismConfig::lap2(1.0, 1.0, 0.01, 1000, 1000, 1e-5);
    let spec = SearchSpec {
        c_steps: 8,
        lambda_max: 512,
        ..SearchSpec::default()
    };
    for eps in [0.5, 1.0, 2.0, 4.0] {
        let r = optimize_parameters(&base, eps, &spec)?;
        let closed = rho_star(eps, 0.01, 1000, 1e-5)?;
        match (r.c_star, r.b_star, r.rho_star) {
            (Some(c), Some(b), Some(rho)) => println!(
                "eps {eps}: C* {c:.4} b* {b:.4} rho* {rho:.4} (closed form {closed:.4}, b init {:.4})",
                b_star_init(c, eps, 0.01, 1000, 1e-5)?
            ),
            _ => println!("eps {eps}: infeasible in the search box"),
        }
    }
    Ok(())
}
