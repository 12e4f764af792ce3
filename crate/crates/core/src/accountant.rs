//! One entry point per mechanism: per-step profile, composition and
//! conversion to (ε, δ).

use serde::Serialize;

use crate::budget::{
    self, compose, delta_for_epsilon, epsilon_for_delta, wall_report, NoiseSolution, PrivacyPoint, Tolerance, WallAccountant,
    WallReport,
};
use crate::config::{Mechanism, MechanismConfig, SummationMode};
use crate::error::{Error, Result};
use crate::gaussian::gaussian_profile;
use crate::lap2::{multivariate_profile, pure_laplace_epsilon, UnivariateMoments};
use crate::profile::MomentProfile;

/// A per-step profile and how the coordinate sum was evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    pub profile: MomentProfile,
    /// Resolved summation mode; single-coordinate mechanisms report `Exact`.
    pub mode: SummationMode,
    pub exact: bool,
}

/// Per-step `α(λ)` for `λ = 1..=lambda_max`.
pub fn per_step_profile(cfg: &MechanismConfig) -> Result<StepProfile> {
    cfg.validate()?;
    let lambdas: Vec<u32> = (1..=cfg.lambda_max).collect();
    let single = |ratio: f64| -> Result<Vec<f64>> { Ok(UnivariateMoments::new(cfg.sampling_rate, ratio)?.alphas(&lambdas)) };
    let (alphas, mode, exact) = match cfg.mechanism {
        Mechanism::Lap2 => {
            let p = multivariate_profile(cfg)?;
            let mode = if p.exact { SummationMode::Exact } else { SummationMode::Bucketed };
            (p.alphas, mode, p.exact)
        }
        Mechanism::Gaussian => (gaussian_profile(cfg)?, SummationMode::Exact, true),
        Mechanism::LaplaceL1 => {
            let ratio = (cfg.dim as f64).sqrt() * cfg.clip / cfg.noise_scale;
            (single(ratio)?, SummationMode::Exact, true)
        }
        Mechanism::PureLaplace => (single(cfg.clip / cfg.noise_scale)?, SummationMode::Exact, true),
    };
    Ok(StepProfile {
        profile: MomentProfile::per_step(cfg.mechanism, alphas)?,
        mode,
        exact,
    })
}

/// Everything `account` reports for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyReport {
    pub mechanism: Mechanism,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda_star: Option<u32>,
    /// Per-step `α(λ*)`.
    pub per_step_alpha: Option<f64>,
    pub mode: SummationMode,
    pub exact: bool,
}

/// ε at the configured δ. A composed profile that is identically zero leaks
/// nothing and reports ε = 0; pure Laplace reports its single-release `C/b`.
pub fn privacy_report(cfg: &MechanismConfig) -> Result<PrivacyReport> {
    cfg.validate()?;
    if cfg.mechanism == Mechanism::PureLaplace {
        return Ok(PrivacyReport {
            mechanism: cfg.mechanism,
            epsilon: pure_laplace_epsilon(cfg.clip, cfg.noise_scale)?,
            delta: 0.0,
            lambda_star: None,
            per_step_alpha: None,
            mode: SummationMode::Exact,
            exact: true,
        });
    }
    let step = per_step_profile(cfg)?;
    let composed = compose(&step.profile, cfg.steps)?;
    let point = if composed.is_zero() {
        PrivacyPoint {
            epsilon: 0.0,
            delta: cfg.delta,
            lambda_star: composed.lambdas().first().copied(),
        }
    } else {
        epsilon_for_delta(&composed, cfg.delta)?
    };
    Ok(PrivacyReport {
        mechanism: cfg.mechanism,
        epsilon: point.epsilon,
        delta: point.delta,
        lambda_star: point.lambda_star,
        per_step_alpha: point.lambda_star.and_then(|l| step.profile.alpha_at(l)),
        mode: step.mode,
        exact: step.exact,
    })
}

/// ε of `cfg` with its noise scale replaced.
pub fn epsilon_at_noise(cfg: &MechanismConfig, noise_scale: f64) -> Result<PrivacyPoint> {
    let r = privacy_report(&cfg.clone().with_noise(noise_scale))?;
    Ok(PrivacyPoint {
        epsilon: r.epsilon,
        delta: r.delta,
        lambda_star: r.lambda_star,
    })
}

/// δ at `epsilon` from the composed profile of `cfg` with its noise scale replaced.
pub fn delta_at_noise(cfg: &MechanismConfig, noise_scale: f64, epsilon: f64) -> Result<PrivacyPoint> {
    let cfg = cfg.clone().with_noise(noise_scale);
    let step = per_step_profile(&cfg)?;
    delta_for_epsilon(&compose(&step.profile, cfg.steps)?, epsilon)
}

/// Smallest noise scale in `bounds` meeting `target`; the configured noise
/// scale is ignored.
pub fn invert_noise(
    cfg: &MechanismConfig,
    target: f64,
    bounds: (f64, f64),
    tolerance: Tolerance,
    start: Option<f64>,
) -> Result<NoiseSolution> {
    budget::invert_noise_for_epsilon(|b| epsilon_at_noise(cfg, b), target, bounds, tolerance, start)
}

/// A configured accountant searched over a fixed noise bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfiguredWall {
    pub config: MechanismConfig,
    pub bounds: (f64, f64),
    pub tolerance: Tolerance,
}

impl WallAccountant for ConfiguredWall {
    fn invert(&mut self, epsilon: f64) -> Result<Option<f64>> {
        match invert_noise(&self.config, epsilon, self.bounds, self.tolerance, None) {
            Ok(s) => Ok(Some(s.noise_scale)),
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn delta_at(&mut self, noise: f64, epsilon: f64) -> Result<f64> {
        Ok(delta_at_noise(&self.config, noise, epsilon)?.delta)
    }
}

/// Lap2 against the Gaussian baseline at each sampling rate. `base` supplies
/// clip, steps, dimension, δ, order bound and summation mode; its mechanism,
/// noise and sampling rate are replaced.
pub fn wall_diagnostics(
    base: &MechanismConfig,
    sampling_rates: &[f64],
    epsilons: &[f64],
    bounds: (f64, f64),
    tolerance: Tolerance,
) -> Result<Vec<WallReport>> {
    sampling_rates
        .iter()
        .map(|&q| {
            let cfg = base.clone().with_sampling_rate(q);
            let mut lap2 = ConfiguredWall {
                config: cfg.clone().with_mechanism(Mechanism::Lap2),
                bounds,
                tolerance,
            };
            let mut gaussian = ConfiguredWall {
                config: cfg.with_mechanism(Mechanism::Gaussian),
                bounds,
                tolerance,
            };
            wall_report(q, epsilons, &mut lap2, &mut gaussian)
        })
        .collect()
}
