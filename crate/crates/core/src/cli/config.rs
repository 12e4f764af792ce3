//! Run configuration: defaults, then the config file, then flags.

use serde::{Deserialize, Serialize};

use super::output::DEFAULT_PRECISION;
use crate::budget::Tolerance;
use crate::config::{GaussianVariant, Mechanism, MechanismConfig, SummationMode, DEFAULT_LAMBDA_MAX};
use crate::error::{Error, Result};
use crate::optimizer::{SearchSpec, Spacing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// `search` block of a config file. A bare number for `tau` is an absolute
/// tolerance.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchFile {
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub c_steps: Option<u32>,
    pub c_spacing: Option<Spacing>,
    pub b_min: Option<f64>,
    pub b_max: Option<f64>,
    pub tau: Option<TauSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Absolute(f64),
    Tagged(Tolerance),
}

impl From<TauSpec> for Tolerance {
    fn from(t: TauSpec) -> Tolerance {
        match t {
            TauSpec::Absolute(v) => Tolerance::Absolute(v),
            TauSpec::Tagged(t) => t,
        }
    }
}

/// A config file; every key is optional and unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mechanism: Option<Mechanism>,
    pub clip: Option<f64>,
    pub noise_scale: Option<f64>,
    pub sampling_rate: Option<f64>,
    pub steps: Option<u64>,
    pub dim: Option<u64>,
    pub delta: Option<f64>,
    pub lambda_max: Option<u32>,
    pub gaussian_variant: Option<GaussianVariant>,
    pub mode: Option<SummationMode>,
    pub search: Option<SearchFile>,
    pub format: Option<Format>,
    pub precision: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }
}

/// Search block as echoed in `effective_config`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchEcho {
    pub c_min: f64,
    pub c_max: f64,
    pub c_steps: u32,
    pub c_spacing: Spacing,
    pub b_min: f64,
    pub b_max: f64,
    pub tau: Tolerance,
}

/// The validated configuration every command runs with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mechanism: Mechanism,
    pub clip: f64,
    pub noise_scale: f64,
    pub sampling_rate: f64,
    pub steps: u64,
    pub dim: u64,
    pub delta: f64,
    pub lambda_max: u32,
    pub gaussian_variant: GaussianVariant,
    pub mode: SummationMode,
    pub search: SearchEcho,
    /// Output format; absent means the command's own default.
    pub format: Option<Format>,
    pub precision: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SearchSpec::default();
        RunConfig {
            mechanism: Mechanism::Lap2,
            clip: 1.0,
            noise_scale: 1.0,
            sampling_rate: 0.01,
            steps: 1000,
            dim: 1,
            delta: 1e-5,
            lambda_max: DEFAULT_LAMBDA_MAX,
            gaussian_variant: GaussianVariant::Normalized,
            mode: SummationMode::Auto,
            search: SearchEcho {
                c_min: s.c_min,
                c_max: s.c_max,
                c_steps: s.c_steps,
                c_spacing: s.c_spacing,
                b_min: s.b_min,
                b_max: s.b_max,
                tau: s.tau,
            },
            format: None,
            precision: DEFAULT_PRECISION,
        }
    }
}

macro_rules! take {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

impl RunConfig {
    /// Overlays every field present in `f`.
    pub fn apply(&mut self, f: FileConfig) {
        take!(self.mechanism, f.mechanism);
        take!(self.clip, f.clip);
        take!(self.noise_scale, f.noise_scale);
        take!(self.sampling_rate, f.sampling_rate);
        take!(self.steps, f.steps);
        take!(self.dim, f.dim);
        take!(self.delta, f.delta);
        take!(self.lambda_max, f.lambda_max);
        take!(self.gaussian_variant, f.gaussian_variant);
        take!(self.mode, f.mode);
        self.format = f.format.or(self.format);
        take!(self.precision, f.precision);
        if let Some(s) = f.search {
            take!(self.search.c_min, s.c_min);
            take!(self.search.c_max, s.c_max);
            take!(self.search.c_steps, s.c_steps);
            take!(self.search.c_spacing, s.c_spacing);
            take!(self.search.b_min, s.b_min);
            take!(self.search.b_max, s.b_max);
            take!(self.search.tau, s.tau.map(Tolerance::from));
        }
    }

    pub fn mechanism_config(&self) -> MechanismConfig {
        MechanismConfig {
            mechanism: self.mechanism,
            clip: self.clip,
            noise_scale: self.noise_scale,
            sampling_rate: self.sampling_rate,
            steps: self.steps,
            dim: self.dim,
            delta: self.delta,
            lambda_max: self.lambda_max,
            mode: self.mode,
            gaussian_variant: self.gaussian_variant,
        }
    }

    pub fn search_spec(&self) -> SearchSpec {
        let s = &self.search;
        SearchSpec {
            c_min: s.c_min,
            c_max: s.c_max,
            c_steps: s.c_steps,
            c_spacing: s.c_spacing,
            b_min: s.b_min,
            b_max: s.b_max,
            tau: s.tau,
            lambda_max: self.lambda_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mechanism_config().validate()?;
        self.search_spec().validate()?;
        if !(1..=17).contains(&self.precision) {
            return Err(Error::Config(format!("precision: must lie in [1, 17], got {}", self.precision)));
        }
        Ok(())
    }
}
