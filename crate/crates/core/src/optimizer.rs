//! Clip and noise selection: a closed-form starting point and a grid search
//! over the clip with a bisection over the noise scale for each clip value.

use serde::{Deserialize, Serialize};

use crate::accountant::invert_noise;
use crate::budget::Tolerance;
use crate::config::{MechanismConfig, DEFAULT_LAMBDA_MAX};
use crate::error::{domain, Error, Result};

/// `κ_λ = λ(λ+1) / (2(2λ+1))`, the order-dependent factor in the
/// small-ratio expansion `α(λ) ≈ T ζ² κ_λ ρ²`.
pub fn snr_kappa(lambda: u32) -> f64 {
    let l = lambda as f64;
    l * (l + 1.0) / (2.0 * (2.0 * l + 1.0))
}

fn check_target(epsilon: f64, zeta: f64, steps: u64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return domain(format!("target epsilon must be finite and > 0, got {epsilon}"));
    }
    if !(zeta > 0.0 && zeta <= 1.0) {
        return domain(format!("sampling rate must lie in (0, 1], got {zeta}"));
    }
    if steps < 1 {
        return domain("steps must be >= 1");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

/// Closed-form clip-to-noise ratio `ρ ≈ ε/(2ζ) · √(1/(T ln(1/δ)))`.
///
/// A small-`ζ`, small-`ρ` heuristic: it ignores the order discretisation
/// and the harmonic growth of the multivariate sum with dimension.
pub fn rho_star(epsilon: f64, zeta: f64, steps: u64, delta: f64) -> Result<f64> {
    check_target(epsilon, zeta, steps, delta)?;
    Ok(epsilon / (2.0 * zeta) * (1.0 / (steps as f64 * (1.0 / delta).ln())).sqrt())
}

/// Closed-form noise scale `b ≈ (2ζ/ε) √(T ln(1/δ)) · C`, computed as
/// `C / rho_star` so the two stay consistent.
pub fn b_star_init(clip: f64, epsilon: f64, zeta: f64, steps: u64, delta: f64) -> Result<f64> {
    if !(clip > 0.0) || !clip.is_finite() {
        return domain(format!("clip must be finite and > 0, got {clip}"));
    }
    Ok(clip / rho_star(epsilon, zeta, steps, delta)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    #[default]
    Logarithmic,
}

/// Search box and tolerances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpec {
    pub c_min: f64,
    pub c_max: f64,
    pub c_steps: u32,
    pub c_spacing: Spacing,
    pub b_min: f64,
    pub b_max: f64,
    pub tau: Tolerance,
    pub lambda_max: u32,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            c_min: 0.01,
            c_max: 10.0,
            c_steps: 32,
            c_spacing: Spacing::Logarithmic,
            b_min: 1e-4,
            b_max: 1e4,
            tau: Tolerance::default(),
            lambda_max: DEFAULT_LAMBDA_MAX,
        }
    }
}

impl SearchSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.c_min > 0.0 && self.c_min <= self.c_max && self.c_max.is_finite()) {
            return bad(format!("search: need 0 < c_min <= c_max, got [{}, {}]", self.c_min, self.c_max));
        }
        if self.c_steps < 1 {
            return bad("search: c_steps must be >= 1".into());
        }
        if !(self.b_min > 0.0 && self.b_min < self.b_max && self.b_max.is_finite()) {
            return bad(format!("search: need 0 < b_min < b_max, got [{}, {}]", self.b_min, self.b_max));
        }
        let t = match self.tau {
            Tolerance::Absolute(t) | Tolerance::Relative(t) => t,
        };
        if !(t > 0.0) || !t.is_finite() {
            return bad(format!("search: tau must be > 0, got {t}"));
        }
        if self.lambda_max < 1 || self.lambda_max > crate::config::MAX_LAMBDA {
            return bad(format!("search: lambda_max out of range: {}", self.lambda_max));
        }
        Ok(())
    }

    /// Clip values in ascending order.
    pub fn clip_grid(&self) -> Vec<f64> {
        let n = self.c_steps;
        if n == 1 {
            return vec![self.c_min];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if i == 0 {
                    return self.c_min;
                }
                if i == n - 1 {
                    return self.c_max;
                }
                match self.c_spacing {
                    Spacing::Linear => self.c_min + t * (self.c_max - self.c_min),
                    Spacing::Logarithmic => (self.c_min.ln() + t * (self.c_max.ln() - self.c_min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Best clip and noise pair found, or an infeasible marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerResult {
    pub c_star: Option<f64>,
    pub b_star: Option<f64>,
    pub rho_star: Option<f64>,
    pub achieved_epsilon: Option<f64>,
    pub lambda_star: Option<u32>,
    pub feasible: bool,
}

impl OptimizerResult {
    fn infeasible() -> Self {
        OptimizerResult {
            c_star: None,
            b_star: None,
            rho_star: None,
            achieved_epsilon: None,
            lambda_star: None,
            feasible: false,
        }
    }
}

/// Feasible pair found for one clip value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub clip: f64,
    pub noise_scale: f64,
    pub epsilon: f64,
    pub lambda_star: Option<u32>,
}

impl Candidate {
    pub fn ratio(&self) -> f64 {
        self.clip / self.noise_scale
    }
}

/// Smallest feasible noise for one clip value, or `None` when even the
/// largest noise misses the target.
pub fn best_noise_for_clip(base: &MechanismConfig, clip: f64, epsilon: f64, spec: &SearchSpec) -> Result<Option<Candidate>> {
    let cfg = base.clone().with_clip(clip).with_lambda_max(spec.lambda_max);
    let start = b_star_init(clip, epsilon, cfg.sampling_rate, cfg.steps, cfg.delta)
        .ok()
        .map(|b| b.clamp(spec.b_min, spec.b_max));
    match invert_noise(&cfg, epsilon, (spec.b_min, spec.b_max), spec.tau, start) {
        Ok(sol) if sol.point.epsilon <= epsilon => Ok(Some(Candidate {
            clip,
            noise_scale: sol.noise_scale,
            epsilon: sol.point.epsilon,
            lambda_star: sol.point.lambda_star,
        })),
        Ok(_) | Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Picks the candidate with the largest `C/b`; ties go to the larger clip,
/// then the smaller noise.
pub fn select_best(candidates: &[Candidate]) -> Option<Candidate> {
    candidates.iter().copied().reduce(|best, c| {
        let better = c.ratio() > best.ratio()
            || (c.ratio() == best.ratio() && (c.clip > best.clip || (c.clip == best.clip && c.noise_scale < best.noise_scale)));
        if better {
            c
        } else {
            best
        }
    })
}

/// Searches the clip grid ascending; for each clip the smallest noise meeting
/// `epsilon` is found by bisection warm-started at [`b_star_init`]. Returns
/// the pair with the largest `C/b`.
///
/// `base` supplies the mechanism, steps, sampling rate, dimension, δ and
/// summation mode; its clip, noise and order bound are replaced.
pub fn optimize_parameters(base: &MechanismConfig, epsilon: f64, spec: &SearchSpec) -> Result<OptimizerResult> {
    spec.validate()?;
    base.clone().with_lambda_max(spec.lambda_max).validate()?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return domain(format!("target epsilon must be finite and > 0, got {epsilon}"));
    }
    let mut candidates = Vec::new();
    for clip in spec.clip_grid() {
        if let Some(c) = best_noise_for_clip(base, clip, epsilon, spec)? {
            candidates.push(c);
        }
    }
    Ok(match select_best(&candidates) {
        None => OptimizerResult::infeasible(),
        Some(c) => OptimizerResult {
            c_star: Some(c.clip),
            b_star: Some(c.noise_scale),
            rho_star: Some(c.clip / c.noise_scale),
            achieved_epsilon: Some(c.epsilon),
            lambda_star: c.lambda_star,
            feasible: true,
        },
    })
}
