//! Independent checks of the closed forms: piecewise integrals, adaptive
//! quadrature and Monte Carlo over explicit two-component mixtures, plus
//! random instance generators for property checks.
//!
//! Nothing here calls the accountant. The Laplace moment
//! `A = E_{z~μ0}[(1 - ζ + ζ μ1(z)/μ0(z))^{λ+1}]` is computed by splitting
//! the line at the two means: left of both the likelihood ratio is the
//! constant `e^{-Δ}`, right of both it is `e^{Δ}`, and in between it is
//! `e^{(2z - m0 - m1)/b}`, whose binomial expansion integrates exactly.

mod quadrature;
mod sampling;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use quadrature::{integrate_log, LogIntegral};
pub use sampling::{majorizes, robin_hood_pair, sample_clipped_gradient, GradientStyle};

use crate::error::{domain, Result};
use crate::numerics::{ln_mixture, log_subsample_weight, log_sum_exp, LogAccumulator, LogValue};

/// Relative tolerance requested from adaptive quadrature.
pub const QUADRATURE_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Laplace,
    Gaussian,
}

/// `μ0` centred at `mean0`, `μ1` at `mean1`, both with the same scale, and
/// the mixture `μ = (1-ζ)μ0 + ζμ1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureSpec {
    pub family: Family,
    /// Laplace `b` or Gaussian `σ`.
    pub scale: f64,
    pub mean0: f64,
    pub mean1: f64,
    pub sampling_rate: f64,
}

impl MixtureSpec {
    pub fn laplace(scale: f64, mean0: f64, mean1: f64, sampling_rate: f64) -> Self {
        MixtureSpec {
            family: Family::Laplace,
            scale,
            mean0,
            mean1,
            sampling_rate,
        }
    }

    pub fn gaussian(scale: f64, mean0: f64, mean1: f64, sampling_rate: f64) -> Self {
        MixtureSpec {
            family: Family::Gaussian,
            scale,
            mean0,
            mean1,
            sampling_rate,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return domain(format!("scale must be finite and > 0, got {}", self.scale));
        }
        if !self.mean0.is_finite() || !self.mean1.is_finite() {
            return domain("means must be finite");
        }
        if !(0.0..=1.0).contains(&self.sampling_rate) {
            return domain(format!("sampling rate {} outside [0, 1]", self.sampling_rate));
        }
        Ok(())
    }

    /// `ln μ0(z)`.
    pub fn ln_base_density(&self, z: f64) -> f64 {
        let s = self.scale;
        match self.family {
            Family::Laplace => -(z - self.mean0).abs() / s - (2.0 * s).ln(),
            Family::Gaussian => {
                let u = (z - self.mean0) / s;
                -0.5 * u * u - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
        }
    }

    /// `ln(μ1(z)/μ0(z))`.
    pub fn ln_likelihood_ratio(&self, z: f64) -> f64 {
        let s = self.scale;
        match self.family {
            Family::Laplace => ((z - self.mean0).abs() - (z - self.mean1).abs()) / s,
            Family::Gaussian => {
                let (a, b) = ((z - self.mean0) / s, (z - self.mean1) / s);
                0.5 * (a - b) * (a + b)
            }
        }
    }

    /// `ln(μ(z)/μ0(z))`.
    pub fn ln_mixture_ratio(&self, z: f64) -> f64 {
        ln_mixture(self.sampling_rate, self.ln_likelihood_ratio(z))
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.mean0, self.mean1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PiecewiseClosedForm,
    AdaptiveQuadrature,
    MonteCarlo,
}

/// An independently computed moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    /// The moment; `+∞` when it overflows, see `log_value`.
    pub value: f64,
    pub log_value: f64,
    /// Absolute bound on `log_value` for deterministic methods; the standard
    /// error of `value` for Monte Carlo.
    pub error_bound: f64,
    pub method: Method,
    pub seed: Option<u64>,
}

impl OracleEstimate {
    fn deterministic(log_value: f64, error_bound: f64, method: Method) -> Self {
        OracleEstimate {
            value: log_value.exp(),
            log_value,
            error_bound,
            method,
            seed: None,
        }
    }
}

/// `ln(e^x - 1)` for `x > 0`.
fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// `ln E_{z~μ0}[(μ1/μ0)^η]` for Laplace laws with means `mean0`, `mean1`,
/// from the three-case split:
///
/// ```text
/// ½ e^{η(m0-m1)/b} + ½ e^{(η-1)(m1-m0)/b}
///   + e^{-η(m0+m1)/b} / (2(2η-1)) · [e^{((2η-1)m1 + m0)/b} - e^{2η m0/b}]
/// ```
///
/// written for `m0 ≤ m1`; the other order follows by reflection.
pub fn case_split_moment_term(mean0: f64, mean1: f64, scale: f64, eta: u32) -> Result<f64> {
    if !(scale > 0.0) {
        return domain(format!("scale must be > 0, got {scale}"));
    }
    let (m0, m1) = if mean0 <= mean1 { (mean0, mean1) } else { (-mean0, -mean1) };
    let (m0, m1) = (m0 / scale, m1 / scale);
    let e = eta as f64;
    let half = -std::f64::consts::LN_2;
    let below = half + e * (m0 - m1);
    let above = half + (e - 1.0) * (m1 - m0);
    let between = if m1 == m0 {
        f64::NEG_INFINITY
    } else if eta == 0 {
        // 1/(2·(-1)) · [e^{m0 - m1} - 1] = ½(1 - e^{-(m1-m0)})
        half + (-(-(m1 - m0)).exp_m1()).ln()
    } else {
        let hi = (2.0 * e - 1.0) * m1 + m0;
        let lo = 2.0 * e * m0;
        -e * (m0 + m1) - (2.0 * (2.0 * e - 1.0)).ln() + hi + (-(lo - hi).exp()).ln_1p()
    };
    Ok(log_sum_exp(&[
        LogValue::new(below)?,
        LogValue::new(above)?,
        LogValue::new(between)?,
    ])
    .ln())
}

/// `ln A` for Laplace mixtures in closed form, as a function of
/// `Δ = |m1 - m0|/b` and `k = λ + 1`.
fn laplace_moment_closed_form(delta: f64, zeta: f64, lambda: u32) -> Result<f64> {
    let k = lambda as f64 + 1.0;
    let half = -std::f64::consts::LN_2;
    if delta == 0.0 || zeta == 0.0 {
        return Ok(0.0);
    }
    let ln_mix = |lr: f64| ln_mixture(zeta, lr);
    // Left of both means, and right of both (with the tail mass e^{-Δ}/2).
    let left = half + k * ln_mix(-delta);
    let right = half - delta + k * ln_mix(delta);
    // Between: ½ Σ_η w_η e^{-ηΔ} ∫_0^Δ e^{(2η-1)u} du.
    let mut terms = Vec::with_capacity(lambda as usize + 2);
    for eta in 0..=lambda + 1 {
        let w = log_subsample_weight(lambda, eta, zeta)?;
        if w.is_zero() {
            continue;
        }
        let e = eta as f64;
        let integral = if eta == 0 {
            (-(-delta).exp_m1()).ln()
        } else {
            ln_expm1((2.0 * e - 1.0) * delta) - (2.0 * e - 1.0).ln()
        };
        terms.push(LogValue::new(w.ln() + half - e * delta + integral)?);
    }
    let middle = log_sum_exp(&terms).ln();
    Ok(log_sum_exp(&[LogValue::new(left)?, LogValue::new(right)?, LogValue::new(middle)?]).ln())
}

fn moment_by_quadrature(spec: &MixtureSpec, ln_integrand: &dyn Fn(f64) -> f64, extra: &[f64]) -> Result<OracleEstimate> {
    let mut bps = spec.breakpoints();
    bps.extend_from_slice(extra);
    let r = integrate_log(ln_integrand, &bps, spec.scale, QUADRATURE_REL_TOL)?;
    Ok(OracleEstimate::deterministic(r.log_value, r.rel_error, Method::AdaptiveQuadrature))
}

/// `A = E_{z~μ0}[(μ(z)/μ0(z))^{λ+1}]` by adaptive quadrature alone.
pub fn quadrature_moment_a_numeric(spec: &MixtureSpec, lambda: u32) -> Result<OracleEstimate> {
    spec.validate()?;
    let k = lambda as f64 + 1.0;
    if spec.sampling_rate == 0.0 || spec.mean0 == spec.mean1 {
        return Ok(OracleEstimate::deterministic(0.0, 0.0, Method::AdaptiveQuadrature));
    }
    let f = |z: f64| spec.ln_base_density(z) + k * spec.ln_mixture_ratio(z);
    let extra = gaussian_peak(spec, k);
    moment_by_quadrature(spec, &f, &extra)
}

/// Where the Gaussian integrand of order `k` peaks when the ratio term
/// dominates: the base law tilted `k` times towards `mean1`.
fn gaussian_peak(spec: &MixtureSpec, k: f64) -> Vec<f64> {
    match spec.family {
        Family::Gaussian => vec![spec.mean0 + k * (spec.mean1 - spec.mean0)],
        Family::Laplace => vec![],
    }
}

/// Result of [`quadrature_moment_a`]: the closed-form value and the
/// quadrature cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentCrossCheck {
    pub estimate: OracleEstimate,
    pub quadrature: OracleEstimate,
    /// `|ln A_closed - ln A_quadrature|`.
    pub disagreement: f64,
}

/// `A` for a mixture. Laplace mixtures are evaluated by the piecewise closed
/// form and cross-checked by quadrature; `error_bound` covers both. Gaussian
/// mixtures use quadrature alone.
pub fn quadrature_moment_a(spec: &MixtureSpec, lambda: u32) -> Result<MomentCrossCheck> {
    spec.validate()?;
    let quad = quadrature_moment_a_numeric(spec, lambda)?;
    if spec.family == Family::Gaussian {
        return Ok(MomentCrossCheck {
            estimate: quad,
            quadrature: quad,
            disagreement: 0.0,
        });
    }
    let delta = (spec.mean1 - spec.mean0).abs() / spec.scale;
    let closed = laplace_moment_closed_form(delta, spec.sampling_rate, lambda)?;
    let disagreement = (closed - quad.log_value).abs();
    // Closed-form rounding grows with the number of binomial terms.
    let rounding = 4.0 * f64::EPSILON * (lambda as f64 + 2.0) * (1.0 + closed.abs());
    Ok(MomentCrossCheck {
        estimate: OracleEstimate::deterministic(closed, disagreement.max(rounding), Method::PiecewiseClosedForm),
        quadrature: quad,
        disagreement,
    })
}

/// `B = E_{z~μ0}[(μ0(z)/μ(z))^λ]` by adaptive quadrature. Needs `ζ < 1`.
pub fn quadrature_moment_b(spec: &MixtureSpec, lambda: u32) -> Result<OracleEstimate> {
    spec.validate()?;
    if spec.sampling_rate >= 1.0 {
        return domain("the B moment needs a sampling rate below one");
    }
    if spec.sampling_rate == 0.0 || spec.mean0 == spec.mean1 {
        return Ok(OracleEstimate::deterministic(0.0, 0.0, Method::AdaptiveQuadrature));
    }
    let l = lambda as f64;
    let f = |z: f64| spec.ln_base_density(z) - l * spec.ln_mixture_ratio(z);
    moment_by_quadrature(spec, &f, &[])
}

/// `E_{z~N(0,σ²)}[(μ(z)/μ0(z))^{λ+1}]` for Gaussian laws with means 0 and 1.
pub fn gaussian_mixture_moment(sigma: f64, zeta: f64, lambda: u32) -> Result<OracleEstimate> {
    Ok(quadrature_moment_a(&MixtureSpec::gaussian(sigma, 0.0, 1.0, zeta), lambda)?.estimate)
}

/// Monte Carlo estimate of `A`, deterministic in `seed`.
pub fn mc_moment(spec: &MixtureSpec, lambda: u32, samples: usize, seed: u64) -> Result<OracleEstimate> {
    spec.validate()?;
    if samples < 10_000 {
        return domain(format!("Monte Carlo needs at least 10^4 samples, got {samples}"));
    }
    let k = lambda as f64 + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut first, mut second) = (LogAccumulator::new(), LogAccumulator::new());
    for _ in 0..samples {
        let z = match spec.family {
            Family::Laplace => {
                // Inverse CDF on (-½, ½).
                let u: f64 = rng.gen::<f64>() - 0.5;
                spec.mean0 - spec.scale * u.signum() * (-2.0 * u.abs()).ln_1p()
            }
            Family::Gaussian => spec.mean0 + spec.scale * rng.sample::<f64, _>(rand_distr::StandardNormal),
        };
        let l = k * spec.ln_mixture_ratio(z);
        first.push(l);
        second.push(2.0 * l);
    }
    let n = samples as f64;
    let log_value = first.value() - n.ln();
    // Sample variance n/(n-1)·(E[v²] - E[v]²), formed relative to the mean.
    let ratio = (second.value() - n.ln() - 2.0 * log_value).exp();
    let std_dev = ((ratio - 1.0).max(0.0) * n / (n - 1.0)).sqrt() * log_value.exp();
    Ok(OracleEstimate {
        value: log_value.exp(),
        log_value,
        error_bound: std_dev / n.sqrt(),
        method: Method::MonteCarlo,
        seed: Some(seed),
    })
}

/// Grid search over mean pairs for the largest `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseReport {
    pub grid_points: usize,
    pub max_log_moment: f64,
    pub argmax: (f64, f64),
    /// `ln A` at means `(0, C)`.
    pub reference_log_moment: f64,
    /// `max_log_moment - reference_log_moment`; positive when some pair on
    /// the grid is worse than `(0, C)`.
    pub gap: f64,
    /// Largest `|ln A|` over pairs with equal means (should be zero).
    pub equal_mean_residual: f64,
}

/// Evaluates `A` for every pair of means on a `points × points` grid over
/// `[-C, C]²` with `C = r` at unit scale. Diagnostic only.
pub fn verify_worst_case_means(zeta: f64, r: f64, lambda: u32, points: usize) -> Result<WorstCaseReport> {
    if points < 2 {
        return domain("mean grid needs at least two points per axis");
    }
    if !(r >= 0.0) || !r.is_finite() {
        return domain(format!("ratio must be finite and >= 0, got {r}"));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| -r + 2.0 * r * i as f64 / (points - 1) as f64)
        .collect();
    let mut best = (f64::NEG_INFINITY, (0.0, 0.0));
    let mut residual: f64 = 0.0;
    for &m0 in &grid {
        for &m1 in &grid {
            let a = laplace_moment_closed_form((m1 - m0).abs(), zeta, lambda)?;
            if m0 == m1 {
                residual = residual.max(a.abs());
            }
            if a > best.0 {
                best = (a, (m0, m1));
            }
        }
    }
    let reference = laplace_moment_closed_form(r, zeta, lambda)?;
    Ok(WorstCaseReport {
        grid_points: points * points,
        max_log_moment: best.0,
        argmax: best.1,
        reference_log_moment: reference,
        gap: best.0 - reference,
        equal_mean_residual: residual,
    })
}

/// `ln[(2/√π)^n (n/2)! / n!]` by summing logs over the factorial definitions.
pub fn log_volume_ratio_by_sum(n: u64) -> f64 {
    let nf = n as f64;
    let ln_fact = |m: u64| -> f64 { (2..=m).map(|i| (i as f64).ln()).sum() };
    // Γ(n/2 + 1) for odd n: (n/2)! = √π · n!! / 2^{(n+1)/2}.
    let ln_half_fact = if n % 2 == 0 {
        ln_fact(n / 2)
    } else {
        let double_fact: f64 = (1..=n).step_by(2).map(|i| (i as f64).ln()).sum();
        0.5 * std::f64::consts::PI.ln() + double_fact - (n + 1) as f64 / 2.0 * std::f64::consts::LN_2
    };
    nf * (std::f64::consts::LN_2 - 0.5 * std::f64::consts::PI.ln()) + ln_half_fact - ln_fact(n)
}
