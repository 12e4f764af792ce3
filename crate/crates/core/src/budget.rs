//! Composition, (ε, δ) conversions, noise inversion and privacy-wall
//! diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::profile::{MomentProfile, Scope};

/// An (ε, δ) guarantee and the order that attained it. `lambda_star` is
/// absent for pure-ε mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrivacyPoint {
    pub epsilon: f64,
    pub delta: f64,
    pub lambda_star: Option<u32>,
}

/// `T` identical steps: `α_T(λ) = T·α(λ)`.
pub fn compose(per_step: &MomentProfile, steps: u64) -> Result<MomentProfile> {
    if steps < 1 {
        return domain("composition needs at least one step");
    }
    if per_step.scope != Scope::PerStep {
        return domain("profile is already composed");
    }
    Ok(per_step.scaled(steps as f64, Scope::Composed))
}

/// `δ = min_λ exp(α(λ) - λε)`, capped at one.
pub fn delta_for_epsilon(profile: &MomentProfile, epsilon: f64) -> Result<PrivacyPoint> {
    if !(epsilon >= 0.0) {
        return domain(format!("epsilon must be >= 0, got {epsilon}"));
    }
    let mut best: Option<(f64, u32)> = None;
    for (l, a) in profile.entries() {
        let v = a - l as f64 * epsilon;
        if best.map_or(true, |(b, _)| v < b) {
            best = Some((v, l));
        }
    }
    let (log_delta, lambda) = best.expect("profiles are nonempty");
    Ok(PrivacyPoint {
        epsilon,
        delta: log_delta.exp().min(1.0),
        lambda_star: Some(lambda),
    })
}

/// Tight conversion:
/// `ε = min_λ α(λ)/λ + ln(λ/(λ+1)) - (ln δ + ln(λ+1))/λ`, floored at zero.
pub fn epsilon_for_delta(profile: &MomentProfile, delta: f64) -> Result<PrivacyPoint> {
    check_delta(delta)?;
    scan_epsilon(profile, delta, |alpha, l| {
        alpha / l + (l / (l + 1.0)).ln() - (delta.ln() + (l + 1.0).ln()) / l
    })
}

/// Plain tail-bound conversion `ε = min_λ (α(λ) - ln δ)/λ`.
pub fn simple_epsilon_for_delta(profile: &MomentProfile, delta: f64) -> Result<PrivacyPoint> {
    check_delta(delta)?;
    scan_epsilon(profile, delta, |alpha, l| (alpha - delta.ln()) / l)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

fn scan_epsilon(profile: &MomentProfile, delta: f64, at: impl Fn(f64, f64) -> f64) -> Result<PrivacyPoint> {
    let mut best: Option<(f64, u32)> = None;
    for (l, a) in profile.entries() {
        let v = at(a, l as f64);
        if best.map_or(true, |(b, _)| v < b) {
            best = Some((v, l));
        }
    }
    let (eps, lambda) = best.expect("profiles are nonempty");
    if !eps.is_finite() {
        return Err(Error::Infeasible(format!(
            "no order in 1..={} gives a finite epsilon",
            profile.lambdas().last().copied().unwrap_or(0)
        )));
    }
    Ok(PrivacyPoint {
        epsilon: eps.max(0.0),
        delta,
        lambda_star: Some(lambda),
    })
}

/// Stopping width of a noise bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    /// Stop when `hi - lo ≤ τ`.
    Absolute(f64),
    /// Stop when `hi - lo ≤ τ·hi`.
    Relative(f64),
}

impl Tolerance {
    fn reached(self, lo: f64, hi: f64) -> bool {
        match self {
            Tolerance::Absolute(t) => hi - lo <= t,
            Tolerance::Relative(t) => hi - lo <= t * hi,
        }
    }

    fn validate(self) -> Result<()> {
        let t = match self {
            Tolerance::Absolute(t) | Tolerance::Relative(t) => t,
        };
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("tolerance must be finite and > 0, got {t}"));
        }
        Ok(())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Relative(1e-4)
    }
}

/// Outcome of a noise inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSolution {
    /// Smallest feasible noise found; within the tolerance of the boundary.
    pub noise_scale: f64,
    pub point: PrivacyPoint,
    /// Forward accountant calls made.
    pub evaluations: usize,
}

/// Finds the smallest noise scale in `[lo, hi]` whose ε is at most
/// `target`, given `privacy(noise)` strictly decreasing in the noise.
///
/// `start`, when given, is probed first and the bracket is grown from it by
/// doubling or halving before bisecting.
pub fn invert_noise_for_epsilon(
    mut privacy: impl FnMut(f64) -> Result<PrivacyPoint>,
    target: f64,
    (lo, hi): (f64, f64),
    tolerance: Tolerance,
    start: Option<f64>,
) -> Result<NoiseSolution> {
    if !(target > 0.0) {
        return domain(format!("target epsilon must be > 0, got {target}"));
    }
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return domain(format!("noise bracket [{lo}, {hi}] is invalid"));
    }
    tolerance.validate()?;
    let mut evaluations = 0;
    let mut eval = |b: f64| -> Result<PrivacyPoint> {
        evaluations += 1;
        match privacy(b) {
            Err(Error::Infeasible(_)) => Ok(PrivacyPoint {
                epsilon: f64::INFINITY,
                delta: f64::NAN,
                lambda_star: None,
            }),
            other => other,
        }
    };

    let at_lo = eval(lo)?;
    let at_hi = eval(hi)?;
    if at_lo.epsilon < at_hi.epsilon {
        return Err(Error::Invariant(format!(
            "epsilon increases with noise: {} at {lo} but {} at {hi}",
            at_lo.epsilon, at_hi.epsilon
        )));
    }
    if at_lo.epsilon <= target {
        return Ok(NoiseSolution {
            noise_scale: lo,
            point: at_lo,
            evaluations: 2,
        });
    }
    if at_hi.epsilon > target {
        return Err(Error::Infeasible(format!(
            "epsilon {} at the largest noise {hi} exceeds the target {target}",
            at_hi.epsilon
        )));
    }

    let (mut lo, mut hi, mut best) = (lo, hi, at_hi);
    if let Some(s) = start.filter(|s| s.is_finite() && *s > lo && *s < hi) {
        let p = eval(s)?;
        if p.epsilon <= target {
            hi = s;
            best = p;
            let mut probe = s / 2.0;
            while probe > lo {
                let p = eval(probe)?;
                if p.epsilon <= target {
                    hi = probe;
                    best = p;
                    probe /= 2.0;
                } else {
                    lo = probe;
                    break;
                }
            }
        } else {
            lo = s;
            let mut probe = s * 2.0;
            while probe < hi {
                let p = eval(probe)?;
                if p.epsilon <= target {
                    hi = probe;
                    best = p;
                    break;
                }
                lo = probe;
                probe *= 2.0;
            }
        }
    }

    while !tolerance.reached(lo, hi) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = eval(mid)?;
        if p.epsilon <= target {
            hi = mid;
            best = p;
        } else {
            lo = mid;
        }
    }
    Ok(NoiseSolution {
        noise_scale: hi,
        point: best,
        evaluations,
    })
}

/// `|d ln σ / d ln ε|` by central differences on the grid, one-sided at the
/// ends or next to an infeasible neighbour. `None` where no finite pair
/// exists.
pub fn wall_slopes(epsilons: &[f64], noise: &[Option<f64>]) -> Vec<Option<f64>> {
    let n = epsilons.len();
    let slope = |i: usize, j: usize| -> Option<f64> {
        let (a, b) = (noise[i]?, noise[j]?);
        Some(((b.ln() - a.ln()) / (epsilons[j].ln() - epsilons[i].ln())).abs())
    };
    (0..n)
        .map(|i| {
            if noise[i].is_none() || n < 2 {
                return None;
            }
            let left = if i > 0 { Some(i - 1) } else { None };
            let right = if i + 1 < n { Some(i + 1) } else { None };
            match (left.filter(|&l| noise[l].is_some()), right.filter(|&r| noise[r].is_some())) {
                (Some(l), Some(r)) => slope(l, r),
                (Some(l), None) => slope(l, i),
                (None, Some(r)) => slope(i, r),
                (None, None) => None,
            }
        })
        .collect()
}

/// The first grid index where `δ_g > 2·δ_L2`.
pub fn first_left_wall(delta_gaussian: &[f64], delta_laplace: &[f64]) -> Option<usize> {
    delta_gaussian
        .iter()
        .zip(delta_laplace)
        .position(|(&g, &l)| g > 2.0 * l)
}

/// One ε grid point of a walls comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallRow {
    pub epsilon: f64,
    pub noise_gaussian: Option<f64>,
    pub noise_lap2: Option<f64>,
    pub w_r_gaussian: Option<f64>,
    pub w_r_lap2: Option<f64>,
    /// Gaussian δ at the variance-matched σ = b√2 for the Laplace scale `b`.
    pub delta_gaussian: Option<f64>,
    pub delta_lap2: Option<f64>,
    pub left_wall: bool,
}

/// Walls comparison at one sampling rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallReport {
    pub sampling_rate: f64,
    pub rows: Vec<WallRow>,
    pub left_wall_epsilon: Option<f64>,
}

/// Accountant hooks the walls comparison needs at one sampling rate.
pub trait WallAccountant {
    /// Smallest noise meeting `epsilon`, or `None` when infeasible.
    fn invert(&mut self, epsilon: f64) -> Result<Option<f64>>;
    /// δ of the composed profile at `noise` for `epsilon`.
    fn delta_at(&mut self, noise: f64, epsilon: f64) -> Result<f64>;
}

/// Test hook: noise `σ = 1/ε` exactly and a constant δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseEpsilonWall {
    pub delta: f64,
}

impl WallAccountant for InverseEpsilonWall {
    fn invert(&mut self, epsilon: f64) -> Result<Option<f64>> {
        Ok(Some(1.0 / epsilon))
    }

    fn delta_at(&mut self, _noise: f64, _epsilon: f64) -> Result<f64> {
        Ok(self.delta)
    }
}

/// Builds a walls report from a Laplace and a Gaussian accountant at one
/// sampling rate. Gaussian δ is taken at `σ = b√2` (equal per-coordinate
/// variance) for the inverted Laplace scale `b`.
pub fn wall_report(
    sampling_rate: f64,
    epsilons: &[f64],
    lap2: &mut dyn WallAccountant,
    gaussian: &mut dyn WallAccountant,
) -> Result<WallReport> {
    if epsilons.len() < 3 {
        return domain("walls need at least three epsilon grid points");
    }
    if epsilons.windows(2).any(|w| !(w[0] < w[1])) || !(epsilons[0] > 0.0) {
        return domain("epsilon grid must be positive and strictly increasing");
    }
    let mut noise_l = Vec::with_capacity(epsilons.len());
    let mut noise_g = Vec::with_capacity(epsilons.len());
    let mut delta_l = Vec::with_capacity(epsilons.len());
    let mut delta_g = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let b = lap2.invert(eps)?;
        noise_l.push(b);
        noise_g.push(gaussian.invert(eps)?);
        match b {
            Some(b) => {
                delta_l.push(Some(lap2.delta_at(b, eps)?));
                delta_g.push(Some(gaussian.delta_at(b * std::f64::consts::SQRT_2, eps)?));
            }
            None => {
                delta_l.push(None);
                delta_g.push(None);
            }
        }
    }
    let w_l = wall_slopes(epsilons, &noise_l);
    let w_g = wall_slopes(epsilons, &noise_g);
    let flags: Vec<bool> = delta_g
        .iter()
        .zip(&delta_l)
        .map(|(g, l)| matches!((g, l), (Some(g), Some(l)) if *g > 2.0 * *l))
        .collect();
    let wall = flags.iter().position(|&f| f);
    let rows = (0..epsilons.len())
        .map(|i| WallRow {
            epsilon: epsilons[i],
            noise_gaussian: noise_g[i],
            noise_lap2: noise_l[i],
            w_r_gaussian: w_g[i],
            w_r_lap2: w_l[i],
            delta_gaussian: delta_g[i],
            delta_lap2: delta_l[i],
            left_wall: Some(i) == wall,
        })
        .collect();
    Ok(WallReport {
        sampling_rate,
        rows,
        left_wall_epsilon: wall.map(|i| epsilons[i]),
    })
}
