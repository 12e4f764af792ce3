//! Oracle-against-accountant batteries behind the `verify` command.
//!
//! Every check is deterministic in its seed. Reported errors are absolute
//! differences of logarithms unless a check says otherwise, so they read as
//! relative errors of the underlying moments.

use serde::Serialize;

use crate::config::{GaussianVariant, SummationMode};
use crate::error::Result;
use crate::gaussian::alpha_gaussian;
use crate::lap2::{log_moment_term, sum_over_set, MajorizationSet, UnivariateMoments};
use crate::oracle::{
    case_split_moment_term, gaussian_mixture_moment, mc_moment, quadrature_moment_a, quadrature_moment_b,
    robin_hood_pair, sample_clipped_gradient, verify_worst_case_means, MixtureSpec, WorstCaseReport,
};

pub const STANDARD_RATES: [f64; 6] = [0.0, 1e-3, 1e-2, 1e-1, 0.5, 1.0];
pub const STANDARD_RATIOS: [f64; 5] = [0.01, 0.1, 1.0, 2.0, 5.0];
pub const STANDARD_ORDERS: [u32; 7] = [1, 2, 4, 8, 16, 64, 256];
/// `(ζ, C/b, λ)` points for the vector batteries.
pub const SPOT_GRID: [(f64, f64, u32); 3] = [(0.01, 1.0, 4), (0.1, 2.0, 16), (0.5, 0.1, 8)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Fast,
    Full,
}

/// Outcome of one battery.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest observed error, or largest violation for inequality checks.
    pub max_error: f64,
    pub tolerance: f64,
    /// The first failing case.
    pub failure: Option<String>,
}

struct Tracker {
    result: CheckResult,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tracker {
            result: CheckResult {
                name,
                passed: true,
                cases: 0,
                max_error: 0.0,
                tolerance,
                failure: None,
            },
        }
    }

    fn record(&mut self, error: f64, case: impl FnOnce() -> String) {
        let r = &mut self.result;
        r.cases += 1;
        // NaN counts as a failure.
        if !(error <= r.tolerance) {
            r.passed = false;
            if r.failure.is_none() {
                r.failure = Some(format!("{} (error {error:e})", case()));
            }
        }
        if error > r.max_error || error.is_nan() {
            r.max_error = error;
        }
    }

    fn finish(self) -> CheckResult {
        self.result
    }
}

/// `exp(α)` for one coordinate against the oracle's `A`, by closed form
/// and by quadrature.
pub fn closed_form_vs_quadrature(rates: &[f64], ratios: &[f64], orders: &[u32]) -> Result<CheckResult> {
    let mut t = Tracker::new("univariate_vs_quadrature", 1e-8);
    for &zeta in rates {
        for &r in ratios {
            let mut moments = UnivariateMoments::new(zeta, r)?;
            for &lambda in orders {
                let alpha = moments.alpha(lambda);
                let c = quadrature_moment_a(&MixtureSpec::laplace(1.0, 0.0, r, zeta), lambda)?;
                let err = (alpha - c.estimate.log_value)
                    .abs()
                    .max((alpha - c.quadrature.log_value).abs());
                t.record(err, || format!("zeta={zeta} r={r} lambda={lambda}"));
            }
        }
    }
    Ok(t.finish())
}

/// The per-order moment term against the case-split expectation.
pub fn per_order_identity(ratios: &[f64], max_order: u32) -> Result<CheckResult> {
    let mut t = Tracker::new("per_order_identity", 1e-10);
    for &r in ratios {
        for eta in 0..=max_order {
            let f = log_moment_term(r, eta)?;
            let g = case_split_moment_term(0.0, r, 1.0, eta)?;
            t.record((f - g).abs(), || format!("r={r} eta={eta}"));
        }
    }
    Ok(t.finish())
}

/// Monte Carlo `A` within four standard errors of the closed form.
pub fn monte_carlo_agreement(points: &[(f64, f64, u32)], samples: usize, seed: u64) -> Result<CheckResult> {
    let mut t = Tracker::new("monte_carlo_agreement", 4.0);
    for (i, &(zeta, r, lambda)) in points.iter().enumerate() {
        let spec = MixtureSpec::laplace(1.0, 0.0, r, zeta);
        let exact = quadrature_moment_a(&spec, lambda)?.estimate.value;
        let mc = mc_moment(&spec, lambda, samples, seed.wrapping_add(i as u64))?;
        let z = if mc.error_bound > 0.0 {
            (mc.value - exact).abs() / mc.error_bound
        } else if mc.value == exact {
            0.0
        } else {
            f64::INFINITY
        };
        t.record(z, || format!("zeta={zeta} r={r} lambda={lambda}"));
    }
    Ok(t.finish())
}

/// Normalized Gaussian bound against quadrature of the mixture, as the
/// relative error of the moment.
pub fn gaussian_vs_quadrature(rates: &[f64], sigmas: &[f64], max_order: u32) -> Result<CheckResult> {
    let mut t = Tracker::new("gaussian_vs_quadrature", 1e-6);
    for &zeta in rates {
        for &sigma in sigmas {
            for lambda in 1..=max_order {
                let a = alpha_gaussian(sigma, zeta, lambda, GaussianVariant::Normalized)?;
                let q = gaussian_mixture_moment(sigma, zeta, lambda)?;
                t.record((a - q.log_value).exp_m1().abs(), || {
                    format!("zeta={zeta} sigma={sigma} lambda={lambda}")
                });
            }
        }
    }
    Ok(t.finish())
}

fn coordinate_sum(zeta: f64, lambda: u32, values: &[f64], noise: f64) -> Result<f64> {
    let mut total = 0.0;
    for v in values {
        total += UnivariateMoments::new(zeta, v.abs() / noise)?.alpha(lambda);
    }
    Ok(total)
}

/// `Σ α(|g_i|/b) ≤` the majorization-set bound for random clipped `g`.
pub fn majorization_dominance(dims: &[usize], samples: usize, seed: u64) -> Result<CheckResult> {
    let mut t = Tracker::new("majorization_dominance", 1e-10);
    let clip = 1.0;
    for &(zeta, r, lambda) in &SPOT_GRID {
        let noise = clip / r;
        for &n in dims {
            let set = MajorizationSet::new(clip, n as u64)?;
            let bound = sum_over_set(zeta, &set, noise, &[lambda], SummationMode::Exact)?.alphas[0];
            for s in 0..samples {
                let sample_seed = seed ^ ((n as u64) << 32) ^ s as u64;
                let (g, style) = sample_clipped_gradient(n, clip, sample_seed)?;
                let total = coordinate_sum(zeta, lambda, &g, noise)?;
                t.record((total - bound).max(0.0), || {
                    format!("zeta={zeta} r={r} lambda={lambda} n={n} seed={sample_seed} style={style:?}")
                });
            }
        }
    }
    Ok(t.finish())
}

/// `Σ α(x_i) ≤ Σ α(y_i)` whenever `x ≺ y`.
pub fn schur_convexity(dims: &[usize], samples: usize, seed: u64) -> Result<CheckResult> {
    let mut t = Tracker::new("schur_convexity", 1e-10);
    for &(zeta, r, lambda) in &SPOT_GRID {
        let noise = 1.0 / r;
        for &n in dims {
            for s in 0..samples {
                let sample_seed = seed ^ ((n as u64) << 32) ^ s as u64;
                let (g, _) = sample_clipped_gradient(n, 1.0, sample_seed)?;
                let x: Vec<f64> = g.iter().map(|v| v.abs()).collect();
                let (x, y) = robin_hood_pair(&x, sample_seed.rotate_left(17))?;
                let ax = coordinate_sum(zeta, lambda, &x, noise)?;
                let ay = coordinate_sum(zeta, lambda, &y, noise)?;
                t.record((ax - ay).max(0.0), || {
                    format!("zeta={zeta} r={r} lambda={lambda} n={n} seed={sample_seed}")
                });
            }
        }
    }
    Ok(t.finish())
}

/// Finite differences of the moment term in `r`: first differences must be
/// nonnegative and second differences nonnegative, both relative to the
/// larger value.
pub fn slope_and_curvature(ratios_to: f64, steps: usize, orders: &[u32]) -> Result<(CheckResult, CheckResult)> {
    let mut first = Tracker::new("moment_term_increasing", 1e-12);
    let mut second = Tracker::new("moment_term_convex", 1e-9);
    let h = ratios_to / steps as f64;
    for &eta in orders {
        let logs: Vec<f64> = (0..=steps)
            .map(|i| log_moment_term(i as f64 * h, eta))
            .collect::<Result<_>>()?;
        for i in 1..=steps {
            let (a, b) = (logs[i - 1], logs[i]);
            let d1 = -(a - b).exp_m1();
            first.record((-d1).max(0.0), || format!("eta={eta} r={}", i as f64 * h));
            if i < steps {
                let c = logs[i + 1];
                // (F(r-h) - 2F(r) + F(r+h)) / F(r+h)
                let d2 = (a - c).exp() - 2.0 * (b - c).exp() + 1.0;
                second.record((-d2).max(0.0), || format!("eta={eta} r={}", i as f64 * h));
            }
        }
    }
    Ok((first.finish(), second.finish()))
}

/// Bucketed sums bound the exact sum from above within 1%.
pub fn bucketed_vs_exact(dims: &[u64], orders: &[u32]) -> Result<(CheckResult, CheckResult)> {
    let mut below = Tracker::new("bucketed_not_below_exact", 0.0);
    let mut gap = Tracker::new("bucketed_within_one_percent", 1e-2);
    for &(zeta, r, _) in &SPOT_GRID {
        for &n in dims {
            let set = MajorizationSet::new(1.0, n)?;
            let exact = sum_over_set(zeta, &set, 1.0 / r, orders, SummationMode::Exact)?;
            let bucketed = sum_over_set(zeta, &set, 1.0 / r, orders, SummationMode::Bucketed)?;
            for (i, &lambda) in orders.iter().enumerate() {
                let (e, b) = (exact.alphas[i], bucketed.alphas[i]);
                let case = || format!("zeta={zeta} r={r} n={n} lambda={lambda}");
                below.record((e - b).max(0.0), case);
                gap.record(if e > 0.0 { (b - e) / e } else { b }, case);
            }
        }
    }
    Ok((below.finish(), gap.finish()))
}

/// Where `B` exceeds `A`. Recorded, never asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingProbe {
    pub cases: usize,
    pub b_exceeds_a: usize,
    /// Largest `ln B - ln A` seen.
    pub max_log_b_minus_a: f64,
    pub at: Option<String>,
}

pub fn ordering_probe(rates: &[f64], ratios: &[f64], orders: &[u32]) -> Result<OrderingProbe> {
    let mut probe = OrderingProbe {
        cases: 0,
        b_exceeds_a: 0,
        max_log_b_minus_a: f64::NEG_INFINITY,
        at: None,
    };
    for &zeta in rates.iter().filter(|&&z| z > 0.0 && z < 1.0) {
        for &r in ratios {
            for &lambda in orders {
                let spec = MixtureSpec::laplace(1.0, 0.0, r, zeta);
                let a = quadrature_moment_a(&spec, lambda)?.estimate.log_value;
                let b = quadrature_moment_b(&spec, lambda)?.log_value;
                probe.cases += 1;
                if b > a {
                    probe.b_exceeds_a += 1;
                }
                if b - a > probe.max_log_b_minus_a {
                    probe.max_log_b_minus_a = b - a;
                    probe.at = Some(format!("zeta={zeta} r={r} lambda={lambda}"));
                }
            }
        }
    }
    Ok(probe)
}

/// Everything `verify` prints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub ordering: OrderingProbe,
    pub worst_case_means: WorstCaseReport,
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let full = suite == Suite::Full;
    let orders: &[u32] = if full { &STANDARD_ORDERS } else { &STANDARD_ORDERS[..6] };
    let mut checks = vec![
        closed_form_vs_quadrature(&STANDARD_RATES, &STANDARD_RATIOS, orders)?,
        per_order_identity(&STANDARD_RATIOS, 257)?,
        monte_carlo_agreement(
            &[(0.01, 1.0, 2), (0.1, 1.0, 8), (0.5, 0.1, 4), (1.0, 0.5, 2)],
            if full { 400_000 } else { 50_000 },
            seed,
        )?,
        gaussian_vs_quadrature(&[1e-3, 1e-2, 1e-1], &[0.5, 1.0, 2.0, 4.0], if full { 64 } else { 16 })?,
    ];
    let (dims, samples): (&[usize], usize) = if full { (&[2, 8, 64, 1024], 1000) } else { (&[2, 8, 64], 100) };
    checks.push(majorization_dominance(dims, samples, seed)?);
    checks.push(schur_convexity(&dims[..3], if full { 500 } else { 50 }, seed)?);
    let (inc, convex) = slope_and_curvature(5.0, if full { 500 } else { 100 }, &[2, 3, 4, 8, 16, 64, 257])?;
    checks.push(inc);
    checks.push(convex);
    let (below, gap) = bucketed_vs_exact(if full { &[20, 300, 5000, 1 << 16] } else { &[20, 300, 5000] }, &[1, 4, 32])?;
    checks.push(below);
    checks.push(gap);
    let ordering = ordering_probe(&STANDARD_RATES, &[0.1, 1.0, 2.0], &[1, 2, 4, 8, 16])?;
    let worst_case_means = verify_worst_case_means(0.01, 1.0, 4, 9)?;
    Ok(VerifyReport {
        suite,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
        ordering,
        worst_case_means,
    })
}
