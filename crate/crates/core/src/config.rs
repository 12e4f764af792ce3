//! Accountant inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported moment order.
pub const MAX_LAMBDA: u32 = 1 << 16;

/// Default moment-order grid bound.
pub const DEFAULT_LAMBDA_MAX: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    /// Laplace noise on l2-clipped gradients, accounted through the
    /// majorization set.
    Lap2,
    /// Subsampled Gaussian baseline.
    Gaussian,
    /// Classical Laplace with the sensitivity inflated to `√n·C`.
    LaplaceL1,
    /// Laplace on l1-clipped gradients; a single release is `C/b`-DP.
    PureLaplace,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Lap2 => "lap2",
            Mechanism::Gaussian => "gaussian",
            Mechanism::LaplaceL1 => "laplace_l1",
            Mechanism::PureLaplace => "pure_laplace",
        }
    }
}

/// How the per-coordinate moments are summed over the majorization set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SummationMode {
    /// Every coordinate is evaluated.
    Exact,
    /// Geometric buckets with a convexity upper bound.
    Bucketed,
    /// Exact for small dimensions, bucketed otherwise.
    #[default]
    Auto,
}

/// Largest dimension that `SummationMode::Auto` sums coordinate by coordinate.
pub const AUTO_EXACT_MAX_DIM: u64 = 1 << 8;

impl SummationMode {
    pub fn resolve(self, dim: u64) -> SummationMode {
        match self {
            SummationMode::Auto if dim <= AUTO_EXACT_MAX_DIM => SummationMode::Exact,
            SummationMode::Auto => SummationMode::Bucketed,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SummationMode::Exact => "exact",
            SummationMode::Bucketed => "bucketed",
            SummationMode::Auto => "auto",
        }
    }
}

/// Which binomial coefficient the Gaussian amplification bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GaussianVariant {
    /// `C(λ+1, η)`: the weights form a probability distribution.
    #[default]
    Normalized,
    /// `C(λ, η)` with exponent `λ+1-η`, exactly as commonly printed. Its
    /// weights sum to `1-ζ`, so it can go negative; kept for audits.
    PaperExact,
}

/// Full accountant input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub mechanism: Mechanism,
    /// Clipping threshold `C`.
    pub clip: f64,
    /// Laplace scale `b` or Gaussian standard deviation `σ`, in gradient units.
    pub noise_scale: f64,
    /// Per-record inclusion probability `ζ`.
    pub sampling_rate: f64,
    pub steps: u64,
    /// Number of model parameters `n`.
    pub dim: u64,
    pub delta: f64,
    pub lambda_max: u32,
    #[serde(default)]
    pub mode: SummationMode,
    #[serde(default)]
    pub gaussian_variant: GaussianVariant,
}

impl MechanismConfig {
    /// A Lap2 configuration with default grid and modes.
    pub fn lap2(clip: f64, noise_scale: f64, sampling_rate: f64, steps: u64, dim: u64, delta: f64) -> Self {
        MechanismConfig {
            mechanism: Mechanism::Lap2,
            clip,
            noise_scale,
            sampling_rate,
            steps,
            dim,
            delta,
            lambda_max: DEFAULT_LAMBDA_MAX,
            mode: SummationMode::Auto,
            gaussian_variant: GaussianVariant::Normalized,
        }
    }

    pub fn with_mechanism(mut self, mechanism: Mechanism) -> Self {
        self.mechanism = mechanism;
        self
    }

    pub fn with_noise(mut self, noise_scale: f64) -> Self {
        self.noise_scale = noise_scale;
        self
    }

    pub fn with_clip(mut self, clip: f64) -> Self {
        self.clip = clip;
        self
    }

    pub fn with_lambda_max(mut self, lambda_max: u32) -> Self {
        self.lambda_max = lambda_max;
        self
    }

    pub fn with_mode(mut self, mode: SummationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_sampling_rate(mut self, zeta: f64) -> Self {
        self.sampling_rate = zeta;
        self
    }

    /// Checks every range; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::Config(format!("{field}: {why}")));
        if !self.clip.is_finite() || self.clip < 0.0 {
            return bad("clip", format!("must be finite and >= 0, got {}", self.clip));
        }
        if !self.noise_scale.is_finite() || self.noise_scale <= 0.0 {
            return bad("noise_scale", format!("must be finite and > 0, got {}", self.noise_scale));
        }
        if !(0.0..=1.0).contains(&self.sampling_rate) {
            return bad("sampling_rate", format!("must lie in [0, 1], got {}", self.sampling_rate));
        }
        if self.steps < 1 {
            return bad("steps", "must be >= 1".into());
        }
        if self.dim < 1 {
            return bad("dim", "must be >= 1".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta", format!("must lie in (0, 1), got {}", self.delta));
        }
        if self.lambda_max < 1 || self.lambda_max > MAX_LAMBDA {
            return bad("lambda_max", format!("must lie in [1, {MAX_LAMBDA}], got {}", self.lambda_max));
        }
        Ok(())
    }

    /// Summation mode after resolving `Auto` against the dimension.
    pub fn effective_mode(&self) -> SummationMode {
        self.mode.resolve(self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_names_fields() {
        let good = MechanismConfig::lap2(1.0, 1.0, 0.01, 10, 4, 1e-5);
        assert!(good.validate().is_ok());
        let err = good.clone().with_sampling_rate(1.5).validate().unwrap_err();
        assert!(err.to_string().contains("sampling_rate"));
        let err = good.clone().with_noise(0.0).validate().unwrap_err();
        assert!(err.to_string().contains("noise_scale"));
        let mut c = good.clone();
        c.dim = 0;
        assert!(c.validate().unwrap_err().to_string().contains("dim"));
        let mut c = good;
        c.delta = 1.0;
        assert!(c.validate().unwrap_err().to_string().contains("delta"));
    }

    #[test]
    fn auto_mode_resolution() {
        assert_eq!(SummationMode::Auto.resolve(1), SummationMode::Exact);
        assert_eq!(SummationMode::Auto.resolve(AUTO_EXACT_MAX_DIM + 1), SummationMode::Bucketed);
        assert_eq!(SummationMode::Exact.resolve(1 << 30), SummationMode::Exact);
    }
}
