//! Closed-form moments accountant for Laplace noise on l2-clipped gradients.
//!
//! A coordinate whose clipped magnitude is `x`, perturbed by Laplace noise of
//! scale `b`, contributes through the ratio `r = x/b`. Its moment term is
//!
//! ```text
//! F(r, η) = (η·e^{(η-1)r} + (η-1)·e^{-ηr}) / (2η - 1)
//! ```
//!
//! and the subsampled per-coordinate bound is
//! `α(λ) = ln Σ_{η=0}^{λ+1} C(λ+1, η)(1-ζ)^{λ+1-η} ζ^η F(r, η)`.
//!
//! Because `F(r, 0) = F(r, 1) = 1` and the weights sum to one, the sum is
//! evaluated as `ln(1 + E)` with `E = Σ_{η≥2} w_η (F(r, η) - 1)`. Every
//! summand of `E` is nonnegative, so small `ζ` or small `r` never cancel.
//!
//! The multivariate bound sums the per-coordinate bound over the worst-case
//! magnitude vector `x_i = C(√i - √(i-1))`.

use crate::config::{Mechanism, MechanismConfig, SummationMode};
use crate::error::{domain, Error, Result};
use crate::numerics::{expm1_minus_x, ln_add_exp, ln_table, log_binomial_raw, softplus, CompensatedSum, LN2};

/// Terms are dropped once the remaining tail is this far below the sum, in nats.
const TAIL_CUTOFF: f64 = 41.5;

fn check_ratio(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return domain(format!("noise ratio must be >= 0, got {r}"));
    }
    Ok(())
}

fn check_rate(zeta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&zeta) {
        return domain(format!("sampling rate {zeta} outside [0, 1]"));
    }
    Ok(())
}

/// `ln((e^t - 1 - t)/t)` for `t > 0`.
fn ln_growth_part(t: f64) -> f64 {
    if t <= 1.0 {
        (expm1_minus_x(t) / t).ln()
    } else {
        t + (-(1.0 + t) * (-t).exp()).ln_1p() - t.ln()
    }
}

/// `ln((e^-s - 1 + s)/s)` for `s > 0`.
fn ln_decay_part(s: f64) -> f64 {
    if s <= 1.0 {
        (expm1_minus_x(-s) / s).ln()
    } else {
        ((-s).exp() - 1.0 + s).ln() - s.ln()
    }
}

/// `ln(F(r, η) - 1)` for `η ≥ 2`, `0 < r < ∞`.
fn ln_excess_unchecked(r: f64, eta: f64) -> f64 {
    let coef = (eta * (eta - 1.0) / (2.0 * eta - 1.0)).ln() + r.ln();
    coef + ln_add_exp(ln_growth_part((eta - 1.0) * r), ln_decay_part(eta * r))
}

/// `ln(F(r, η) - 1)`, or `-∞` when the term is exactly one.
pub fn log_moment_excess(r: f64, eta: u32) -> Result<f64> {
    check_ratio(r)?;
    Ok(if eta <= 1 || r == 0.0 {
        f64::NEG_INFINITY
    } else if r.is_infinite() {
        f64::INFINITY
    } else {
        ln_excess_unchecked(r, eta as f64)
    })
}

/// `ln F(r, η)`.
pub fn log_moment_term(r: f64, eta: u32) -> Result<f64> {
    log_moment_excess(r, eta).map(softplus)
}

/// The moment term `F(r, η)`; overflow saturates to `+∞`.
pub fn moment_term(r: f64, eta: u32) -> Result<f64> {
    log_moment_term(r, eta).map(f64::exp)
}

/// Analytic `dF/dr = η(η-1)/(2η-1) · (e^{(η-1)r} - e^{-ηr})`.
pub fn moment_term_slope(r: f64, eta: u32) -> Result<f64> {
    check_ratio(r)?;
    let e = eta as f64;
    if eta <= 1 {
        return Ok(0.0);
    }
    Ok(e * (e - 1.0) / (2.0 * e - 1.0) * (((e - 1.0) * r).exp() - (-e * r).exp()))
}

/// Per-step bound for one coordinate at a fixed `(ζ, r)`, evaluated at any
/// number of moment orders. Excess terms are cached as orders grow.
#[derive(Debug, Clone)]
pub struct UnivariateMoments {
    zeta: f64,
    ratio: f64,
    // Indexed by η; entries 0 and 1 are unused.
    ln_excess: Vec<f64>,
    // (η-1)r - ln(F(r, η) - 1): how far the pure-growth majorant sits above the term.
    majorant_gap: Vec<f64>,
}

impl UnivariateMoments {
    pub fn new(zeta: f64, ratio: f64) -> Result<Self> {
        check_rate(zeta)?;
        check_ratio(ratio)?;
        Ok(UnivariateMoments {
            zeta,
            ratio,
            ln_excess: vec![f64::NEG_INFINITY; 2],
            majorant_gap: vec![0.0; 2],
        })
    }

    pub fn sampling_rate(&self) -> f64 {
        self.zeta
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    fn extend_to(&mut self, eta_max: usize) {
        let r = self.ratio;
        while self.ln_excess.len() <= eta_max {
            let eta = self.ln_excess.len() as f64;
            let g = ln_excess_unchecked(r, eta);
            self.ln_excess.push(g);
            self.majorant_gap.push((eta - 1.0) * r - g);
        }
    }

    /// `ln E`, where the per-step bound is `ln(1 + E)`.
    pub fn log_excess(&mut self, lambda: u32) -> f64 {
        let zeta = self.zeta;
        let r = self.ratio;
        if lambda == 0 || zeta == 0.0 || r == 0.0 {
            return f64::NEG_INFINITY;
        }
        if r.is_infinite() {
            return f64::INFINITY;
        }
        let k = lambda as usize + 1;
        self.extend_to(k);
        if zeta == 1.0 {
            return self.ln_excess[k];
        }
        let ln_int = ln_table(k + 2);
        let ln_zeta = zeta.ln();
        let ln_keep = (-zeta).ln_1p();
        let ln_odds = ln_zeta - ln_keep;

        let mut ln_term = log_binomial_raw(k as u64, 2) + (k - 2) as f64 * ln_keep + 2.0 * ln_zeta + self.ln_excess[2];
        let mut pivot = ln_term;
        let mut scaled = 1.0_f64;
        let mut eta = 2;
        while eta < k {
            let step = ln_int[k - eta] - ln_int[eta + 1] + ln_odds;
            if step + r <= -LN2 {
                // Majorant terms now at least halve each step, so the rest
                // sums to at most the current majorant term.
                let tail = ln_term + self.majorant_gap[eta];
                if tail < pivot + scaled.ln() - TAIL_CUTOFF {
                    break;
                }
            }
            ln_term += step + (self.ln_excess[eta + 1] - self.ln_excess[eta]);
            eta += 1;
            let d = ln_term - pivot;
            if d > 300.0 {
                scaled = scaled * (-d).exp() + 1.0;
                pivot = ln_term;
            } else {
                scaled += d.exp();
            }
        }
        pivot + scaled.ln()
    }

    /// Per-step bound at one moment order.
    pub fn alpha(&mut self, lambda: u32) -> f64 {
        softplus(self.log_excess(lambda))
    }

    /// Bounds at each of `lambdas`, in order.
    pub fn alphas(&mut self, lambdas: &[u32]) -> Vec<f64> {
        if let Some(&top) = lambdas.iter().max() {
            if self.zeta > 0.0 && self.ratio > 0.0 && self.ratio.is_finite() {
                self.extend_to(top as usize + 1);
            }
        }
        lambdas.iter().map(|&l| self.alpha(l)).collect()
    }
}

/// Per-step bound for a single coordinate with noise ratio `r = x/b`.
pub fn alpha_univariate(zeta: f64, r: f64, lambda: u32) -> Result<f64> {
    Ok(UnivariateMoments::new(zeta, r)?.alpha(lambda))
}

/// Worst-case coordinate magnitudes `x_i = C(√i - √(i-1))` of an l2 ball of
/// radius `C` in `n` dimensions. Entries are computed on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorizationSet {
    clip: f64,
    dim: u64,
}

impl MajorizationSet {
    pub fn new(clip: f64, dim: u64) -> Result<Self> {
        if !clip.is_finite() || clip < 0.0 {
            return domain(format!("clip must be finite and >= 0, got {clip}"));
        }
        if dim == 0 {
            return domain("dimension must be >= 1");
        }
        Ok(MajorizationSet { clip, dim })
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    /// `x_i` for `i ≥ 1`. Also defined past `n`, which bucket bounds use.
    pub fn x(&self, i: u64) -> f64 {
        debug_assert!(i >= 1);
        let i = i as f64;
        self.clip / (i.sqrt() + (i - 1.0).sqrt())
    }

    /// `Σ_{i ≤ k} x_i = C√k`.
    pub fn prefix_sum(&self, k: u64) -> f64 {
        self.clip * (k as f64).sqrt()
    }

    /// `Σ_{i=start}^{end} x_i`.
    pub fn range_sum(&self, start: u64, end: u64) -> f64 {
        debug_assert!(1 <= start && start <= end);
        let m = (end - start + 1) as f64;
        self.clip * m / ((end as f64).sqrt() + ((start - 1) as f64).sqrt())
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.dim).map(move |i| self.x(i))
    }
}

/// A multivariate per-step bound and whether it was summed coordinate by
/// coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultivariateAlpha {
    pub value: f64,
    pub exact: bool,
}

/// Multivariate per-step bounds over a list of moment orders.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateProfile {
    pub lambdas: Vec<u32>,
    pub alphas: Vec<f64>,
    pub exact: bool,
    /// Number of coordinate groups evaluated.
    pub buckets: usize,
}

/// Relative gap between the bucket upper bound and its Jensen lower bound
/// that stops refinement.
pub const BUCKET_TOLERANCE: f64 = 5e-3;
/// Guards the bucketed total against rounding below the exact sum.
const BUCKET_ROUNDING_GUARD: f64 = 1e-12;
const SINGLETON_PREFIX: u64 = 16;
const MAX_REFINEMENTS: usize = 4096;

fn ensure_lap2(cfg: &MechanismConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.mechanism != Mechanism::Lap2 {
        return Err(Error::Config(format!(
            "multivariate Laplace bound needs mechanism lap2, got {}",
            cfg.mechanism.name()
        )));
    }
    Ok(())
}

/// Per-step bound of the multivariate mechanism at one moment order.
pub fn alpha_multivariate(cfg: &MechanismConfig, lambda: u32, mode: SummationMode) -> Result<MultivariateAlpha> {
    ensure_lap2(cfg)?;
    let set = MajorizationSet::new(cfg.clip, cfg.dim)?;
    let p = sum_over_set(cfg.sampling_rate, &set, cfg.noise_scale, &[lambda], mode.resolve(cfg.dim))?;
    Ok(MultivariateAlpha {
        value: p.alphas[0],
        exact: p.exact,
    })
}

/// Per-step multivariate bounds for `λ = 1..=lambda_max`, using the
/// configuration's summation mode.
pub fn multivariate_profile(cfg: &MechanismConfig) -> Result<MultivariateProfile> {
    ensure_lap2(cfg)?;
    let set = MajorizationSet::new(cfg.clip, cfg.dim)?;
    let lambdas: Vec<u32> = (1..=cfg.lambda_max).collect();
    sum_over_set(cfg.sampling_rate, &set, cfg.noise_scale, &lambdas, cfg.effective_mode())
}

/// `Σ_i α(x_i / b)` at each order in `lambdas`.
pub fn sum_over_set(
    zeta: f64,
    set: &MajorizationSet,
    noise_scale: f64,
    lambdas: &[u32],
    mode: SummationMode,
) -> Result<MultivariateProfile> {
    check_rate(zeta)?;
    if !(noise_scale > 0.0) || !noise_scale.is_finite() {
        return domain(format!("noise scale must be finite and > 0, got {noise_scale}"));
    }
    let trivial = zeta == 0.0 || set.clip() == 0.0;
    if trivial {
        return Ok(MultivariateProfile {
            lambdas: lambdas.to_vec(),
            alphas: vec![0.0; lambdas.len()],
            exact: true,
            buckets: 0,
        });
    }
    match mode.resolve(set.dim()) {
        SummationMode::Exact => Ok(exact_sum(zeta, set, noise_scale, lambdas)),
        _ => Ok(bucketed_sum(zeta, set, noise_scale, lambdas)),
    }
}

fn node_alphas(zeta: f64, x: f64, noise_scale: f64, lambdas: &[u32]) -> Vec<f64> {
    UnivariateMoments::new(zeta, x / noise_scale)
        .expect("rate and ratio validated by caller")
        .alphas(lambdas)
}

fn exact_sum(zeta: f64, set: &MajorizationSet, noise_scale: f64, lambdas: &[u32]) -> MultivariateProfile {
    let mut sums = vec![CompensatedSum::default(); lambdas.len()];
    for x in set.iter() {
        for (s, a) in sums.iter_mut().zip(node_alphas(zeta, x, noise_scale, lambdas)) {
            s.add(a);
        }
    }
    MultivariateProfile {
        lambdas: lambdas.to_vec(),
        alphas: sums.iter().map(CompensatedSum::value).collect(),
        exact: true,
        buckets: set.dim() as usize,
    }
}

#[derive(Debug, Clone)]
struct Bucket {
    start: u64,
    end: u64,
    upper: Vec<f64>,
    lower: Vec<f64>,
}

/// Buckets are bounded above by the chord of the convex per-coordinate bound
/// between `x_{end+1}` and `x_start`, and below by Jensen at the bucket mean.
/// The widest relative gap is split at its geometric midpoint until the
/// summed gap is within `BUCKET_TOLERANCE` of the lower total at every order.
fn bucketed_sum(zeta: f64, set: &MajorizationSet, noise_scale: f64, lambdas: &[u32]) -> MultivariateProfile {
    let n = set.dim();
    let mut nodes: std::collections::BTreeMap<u64, Vec<f64>> = Default::default();
    let node = |i: u64, nodes: &mut std::collections::BTreeMap<u64, Vec<f64>>| -> Vec<f64> {
        nodes
            .entry(i)
            .or_insert_with(|| node_alphas(zeta, set.x(i), noise_scale, lambdas))
            .clone()
    };

    let make = |start: u64, end: u64, nodes: &mut std::collections::BTreeMap<u64, Vec<f64>>| -> Bucket {
        let hi = node(start, nodes);
        if start == end {
            return Bucket {
                start,
                end,
                lower: hi.clone(),
                upper: hi,
            };
        }
        let lo = node(end + 1, nodes);
        let m = (end - start + 1) as f64;
        let sum = set.range_sum(start, end);
        let (x_hi, x_lo) = (set.x(start), set.x(end + 1));
        let weight = ((sum - m * x_lo) / (x_hi - x_lo)).clamp(0.0, m);
        let upper = hi
            .iter()
            .zip(&lo)
            .map(|(&a_hi, &a_lo)| {
                if a_hi.is_infinite() {
                    f64::INFINITY
                } else {
                    m * a_lo + (a_hi - a_lo) * weight
                }
            })
            .collect();
        let lower = node_alphas(zeta, sum / m, noise_scale, lambdas)
            .into_iter()
            .map(|a| m * a)
            .collect();
        Bucket {
            start,
            end,
            upper,
            lower,
        }
    };

    let mut buckets = Vec::new();
    let mut start = 1;
    while start <= n {
        let end = if start < SINGLETON_PREFIX {
            start
        } else {
            (2 * start - 1).min(n)
        };
        buckets.push(make(start, end, &mut nodes));
        start = end + 1;
    }

    let width = lambdas.len();
    let totals = |buckets: &[Bucket]| {
        let mut up = vec![CompensatedSum::default(); width];
        let mut low = vec![CompensatedSum::default(); width];
        for b in buckets {
            for j in 0..width {
                up[j].add(b.upper[j]);
                low[j].add(b.lower[j]);
            }
        }
        (
            up.iter().map(CompensatedSum::value).collect::<Vec<_>>(),
            low.iter().map(CompensatedSum::value).collect::<Vec<_>>(),
        )
    };

    for _ in 0..MAX_REFINEMENTS {
        let (up, low) = totals(&buckets);
        // Order with the worst relative gap.
        let mut worst: Option<(usize, f64)> = None;
        for j in 0..width {
            if !up[j].is_finite() {
                continue;
            }
            let gap = up[j] - low[j];
            if gap > BUCKET_TOLERANCE * low[j] {
                let rel = if low[j] > 0.0 { gap / low[j] } else { f64::INFINITY };
                if worst.map_or(true, |(_, w)| rel > w) {
                    worst = Some((j, rel));
                }
            }
        }
        let Some((j, _)) = worst else { break };
        let split = buckets
            .iter()
            .enumerate()
            .filter(|(_, b)| b.end > b.start)
            .max_by(|(_, a), (_, b)| (a.upper[j] - a.lower[j]).total_cmp(&(b.upper[j] - b.lower[j])))
            .map(|(idx, _)| idx);
        let Some(idx) = split else { break };
        let (s, e) = (buckets[idx].start, buckets[idx].end);
        let mid = (((s as f64) * (e as f64 + 1.0)).sqrt().round() as u64).clamp(s + 1, e);
        let left = make(s, mid - 1, &mut nodes);
        let right = make(mid, e, &mut nodes);
        buckets.splice(idx..=idx, [left, right]);
    }

    let (up, _) = totals(&buckets);
    let exact = buckets.iter().all(|b| b.start == b.end);
    MultivariateProfile {
        lambdas: lambdas.to_vec(),
        alphas: up
            .into_iter()
            .map(|u| if exact { u } else { u * (1.0 + BUCKET_ROUNDING_GUARD) })
            .collect(),
        exact,
        buckets: buckets.len(),
    }
}

/// Single-release privacy of Laplace noise on l1-clipped gradients: `C/b`.
pub fn pure_laplace_epsilon(clip: f64, noise_scale: f64) -> Result<f64> {
    if !(noise_scale > 0.0) {
        return domain(format!("noise scale must be > 0, got {noise_scale}"));
    }
    if !(clip >= 0.0) {
        return domain(format!("clip must be >= 0, got {clip}"));
    }
    Ok(clip / noise_scale)
}

/// `√n` (the l1 inflation of an l2 bound) and the log of the ratio of the
/// l1 ball volume to the l2 ball volume at equal radius,
/// `ln[(2/√π)^n Γ(n/2 + 1) / Γ(n + 1)]`.
pub fn clipping_geometry(n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return domain("dimension must be >= 1");
    }
    let nf = n as f64;
    let ln_two_over_sqrt_pi = std::f64::consts::LN_2 - 0.5 * std::f64::consts::PI.ln();
    let ratio = nf * ln_two_over_sqrt_pi + libm::lgamma(nf / 2.0 + 1.0) - libm::lgamma(nf + 1.0);
    Ok((nf.sqrt(), ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Direct evaluation of the univariate sum, term by term in log space.
    fn alpha_direct(zeta: f64, r: f64, lambda: u32) -> f64 {
        use crate::numerics::{log_subsample_weight, log_sum_exp, LogValue};
        let terms: Vec<LogValue> = (0..=lambda + 1)
            .map(|eta| {
                let w = log_subsample_weight(lambda, eta, zeta).unwrap();
                w * LogValue::new(log_moment_term(r, eta).unwrap()).unwrap()
            })
            .collect();
        log_sum_exp(&terms).ln()
    }

    #[test]
    fn moment_term_examples() {
        for r in [0.0, 0.3, 4.0, 50.0] {
            assert_eq!(moment_term(r, 0).unwrap(), 1.0);
            assert_eq!(moment_term(r, 1).unwrap(), 1.0);
        }
        for eta in [0, 2, 9, 300] {
            assert_eq!(moment_term(0.0, eta).unwrap(), 1.0);
        }
        let direct = (2.0 * 1f64.exp() + (-2f64).exp()) / 3.0;
        assert!(rel(moment_term(1.0, 2).unwrap(), direct) < 1e-15);
        assert!((moment_term(1.0, 2).unwrap() - 1.857_300).abs() < 5e-6);
        assert!(moment_term(f64::INFINITY, 3).unwrap().is_infinite());
        assert!(moment_term(-1.0, 3).is_err());
    }

    #[test]
    fn moment_term_matches_naive_formula() {
        for &r in &[1e-3, 0.05, 0.7, 2.0, 6.0] {
            for eta in 2..40u32 {
                let e = eta as f64;
                let naive = (e * ((e - 1.0) * r).exp() + (e - 1.0) * (-e * r).exp()) / (2.0 * e - 1.0);
                assert!(rel(moment_term(r, eta).unwrap(), naive) < 1e-13, "r={r} η={eta}");
            }
        }
    }

    #[test]
    fn excess_is_accurate_for_tiny_ratios() {
        // F(r, 2) - 1 = r² + O(r³).
        let g = log_moment_excess(1e-9, 2).unwrap().exp();
        assert!(rel(g, 1e-18) < 1e-8);
    }

    #[test]
    fn univariate_zeros() {
        assert_eq!(alpha_univariate(0.3, 2.0, 0).unwrap(), 0.0);
        assert_eq!(alpha_univariate(0.0, 2.0, 17).unwrap(), 0.0);
        assert_eq!(alpha_univariate(0.3, 0.0, 17).unwrap(), 0.0);
        assert!(alpha_univariate(1.2, 1.0, 2).is_err());
    }

    #[test]
    fn univariate_matches_direct_sum() {
        for &zeta in &[1e-3, 0.0043, 0.1, 0.5, 0.97, 1.0] {
            for &r in &[0.01, 0.5, 1.0, 3.0] {
                for &lambda in &[1u32, 2, 5, 32, 300, 2000] {
                    let got = alpha_univariate(zeta, r, lambda).unwrap();
                    let want = alpha_direct(zeta, r, lambda);
                    // The direct sum rounds ln(1 + tiny) at about 1e-16 absolute.
                    assert!((got - want).abs() <= 1e-9 * want + 1e-15, "ζ={zeta} r={r} λ={lambda}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn univariate_small_values_keep_relative_precision() {
        // Second-order behaviour: α ≈ ζ² C(λ+1, 2) r² for tiny r.
        let a = alpha_univariate(1e-3, 1e-6, 3).unwrap();
        let approx = 1e-6 * 6.0 * 1e-12;
        assert!(rel(a, approx) < 1e-3, "{a}");
    }

    #[test]
    fn profile_reuses_cache() {
        let mut m = UnivariateMoments::new(0.01, 0.8).unwrap();
        let lambdas: Vec<u32> = (1..=64).collect();
        let all = m.alphas(&lambdas);
        for (i, &l) in lambdas.iter().enumerate() {
            assert_eq!(all[i], alpha_univariate(0.01, 0.8, l).unwrap());
        }
    }

    #[test]
    fn majorization_set_examples() {
        let s = MajorizationSet::new(1.0, 4).unwrap();
        let xs: Vec<f64> = s.iter().collect();
        let want = [1.0, 0.414_213_562, 0.317_837_245, 0.267_949_192];
        for (a, b) in xs.iter().zip(want) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(s.prefix_sum(4), 2.0);
        assert_eq!(MajorizationSet::new(2.5, 1).unwrap().x(1), 2.5);
        let total: f64 = xs.iter().sum();
        assert!(rel(total, 2.0) < 1e-12);
        assert!(rel(s.range_sum(2, 4), 1.0) < 1e-12);
    }

    #[test]
    fn multivariate_single_coordinate() {
        let cfg = MechanismConfig::lap2(1.3, 1.1, 0.02, 1, 1, 1e-5);
        for mode in [SummationMode::Exact, SummationMode::Bucketed] {
            let m = alpha_multivariate(&cfg, 7, mode).unwrap();
            assert_eq!(m.value, alpha_univariate(0.02, 1.3 / 1.1, 7).unwrap());
        }
    }

    #[test]
    fn bucketed_bounds_exact() {
        for &n in &[20u64, 300, 5000] {
            for &(zeta, rho) in &[(0.01, 1.0), (0.1, 3.0), (0.5, 0.2)] {
                let cfg = MechanismConfig::lap2(rho, 1.0, zeta, 1, n, 1e-5);
                let set = MajorizationSet::new(rho, n).unwrap();
                let lambdas = [1, 4, 32, 256];
                let ex = sum_over_set(zeta, &set, 1.0, &lambdas, SummationMode::Exact).unwrap();
                let bu = sum_over_set(zeta, &set, 1.0, &lambdas, SummationMode::Bucketed).unwrap();
                for j in 0..lambdas.len() {
                    assert!(bu.alphas[j] >= ex.alphas[j], "{cfg:?} λ={}", lambdas[j]);
                    assert!((bu.alphas[j] - ex.alphas[j]) / ex.alphas[j] <= 0.01);
                }
            }
        }
    }

    #[test]
    fn pure_laplace_examples() {
        assert_eq!(pure_laplace_epsilon(1.5, 1.5).unwrap(), 1.0);
        assert_eq!(pure_laplace_epsilon(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(pure_laplace_epsilon(2.0, 0.5).unwrap(), 4.0);
        assert!(pure_laplace_epsilon(1.0, 0.0).is_err());
    }

    #[test]
    fn clipping_geometry_examples() {
        assert_eq!(clipping_geometry(1).unwrap().0, 1.0);
        assert!(clipping_geometry(1).unwrap().1.abs() < 1e-15);
        let (s, v) = clipping_geometry(2).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert!((v - (2.0 / std::f64::consts::PI).ln()).abs() < 1e-14);
        // Frozen from summing ln terms of 10!/20! and (2/√π)^20.
        let v20 = clipping_geometry(20).unwrap().1;
        assert!((v20 - -24.815_559_134_973_065).abs() < 1e-11, "{v20}");
    }
}
