//! Turning a composed moment profile into (ε, δ) both ways, and how much the
//! refined conversion saves over the plain tail bound.

use lap2::budget::{compose, delta_for_epsilon, epsilon_for_delta, simple_epsilon_for_delta};
use lap2::config::Mechanism;
use lap2::lap2::UnivariateMoments;
use lap2::profile::MomentProfile;

fn main() -> lap2::error::Result<()> {
    let lambdas: Vec<u32> = (1..=1024).collect();
    let per_step = UnivariateMoments::new(0.01, 0.5)?.alphas(&lambdas);
    let composed = compose(&MomentProfile::per_step(Mechanism::Lap2, per_step)?, 1000)?;

    for delta in [1e-3, 1e-5, 1e-7] {
        let refined = epsilon_for_delta(&composed, delta)?;
        let simple = simple_epsilon_for_delta(&composed, delta)?;
        println!(
            "delta {delta:.0e}: epsilon {:.5} (simple {:.5}) at lambda {}",
            refined.epsilon,
            simple.epsilon,
            refined.lambda_star.unwrap_or(0)
        );
    }
    for eps in [0.5, 1.0, 2.0] {
        let p = delta_for_epsilon(&composed, eps)?;
        println!("epsilon {eps}: delta {:.3e}", p.delta);
    }
    Ok(())
}
