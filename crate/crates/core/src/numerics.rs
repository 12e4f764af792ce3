//! Log-space primitives shared by every accountant.
//!
//! Moment sums in this crate routinely involve exponents like `(η-1)·C/b`
//! with `η` in the thousands, so nothing is exponentiated before the final
//! reduction. [`LogValue`] is a natural-log scale number where `-∞` encodes
//! zero and `+∞` encodes overflow.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::fmt;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

use crate::error::{domain, Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// A nonnegative real stored as its natural logarithm. Never NaN.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    /// log 0
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    /// log 1
    pub const ONE: LogValue = LogValue(0.0);
    /// Saturated overflow.
    pub const INFINITY: LogValue = LogValue(f64::INFINITY);

    /// Wraps a log-scale value, rejecting NaN.
    pub fn new(log: f64) -> Result<Self> {
        if log.is_nan() {
            return domain("log value must not be NaN");
        }
        Ok(LogValue(log))
    }

    /// The log of a nonnegative linear value.
    pub fn from_linear(x: f64) -> Result<Self> {
        if x.is_nan() || x < 0.0 {
            return domain(format!("cannot take the log of {x}"));
        }
        Ok(LogValue(x.ln()))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// Back to linear scale; saturates to `+∞`.
    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogValue({})", self.0)
    }
}

impl Eq for LogValue {}

impl Ord for LogValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Product of the underlying values. Zero annihilates, even against overflow.
impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            LogValue::ZERO
        } else {
            LogValue(self.0 + rhs.0)
        }
    }
}

/// Sum of the underlying values.
impl Add for LogValue {
    type Output = LogValue;

    fn add(self, rhs: LogValue) -> LogValue {
        LogValue(ln_add_exp(self.0, rhs.0))
    }
}

/// `ln(e^a + e^b)` on raw log-scale floats.
#[inline]
pub(crate) fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY || hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ exp(term_i)`, shifted by the largest term. Empty input is `-∞`.
pub fn log_sum_exp(terms: &[LogValue]) -> LogValue {
    let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return LogValue(max);
    }
    let sum: f64 = terms.iter().map(|t| (t.0 - max).exp()).sum();
    LogValue(max + sum.ln())
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogAccumulator {
    max: f64,
    scaled: f64,
}

impl LogAccumulator {
    pub(crate) fn new() -> Self {
        LogAccumulator {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, t: f64) {
        if t == f64::NEG_INFINITY {
            return;
        }
        if t <= self.max {
            self.scaled += (t - self.max).exp();
        } else {
            if self.max == f64::INFINITY {
                return;
            }
            self.scaled = self.scaled * (self.max - t).exp() + 1.0;
            self.max = t;
        }
    }

    pub(crate) fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY || self.max == f64::INFINITY {
            self.max
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 36.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `e^t - 1 - t`, accurate near zero.
pub(crate) fn expm1_minus_x(t: f64) -> f64 {
    if t.abs() <= 1.0 {
        // Taylor tail from t^2/2!; 1/21! is below 2^-64.
        let mut acc = 0.0;
        let mut k = 20.0_f64;
        while k >= 3.0 {
            acc = t / k * (1.0 + acc);
            k -= 1.0;
        }
        t * t / 2.0 * (1.0 + acc)
    } else {
        t.exp_m1() - t
    }
}

/// Stirling-series remainder `ln Γ(n+1) - [(n+½)ln n - n + ½ ln 2π]`.
fn stirling_remainder(n: u64) -> f64 {
    if n <= 15 {
        let nf = n as f64;
        let mut ln_fact = 0.0;
        for i in 2..=n {
            ln_fact += (i as f64).ln();
        }
        return ln_fact - (nf + 0.5) * nf.ln() + nf - HALF_LN_2PI;
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nf = n as f64;
    let n2 = nf * nf;
    (S0 - (S1 - (S2 - (S3 - S4 / n2) / n2) / n2) / n2) / nf
}

/// `ln C(m, k)`.
///
/// Uses the Stirling remainder split so the large `ln Γ` terms cancel
/// analytically instead of in floating point; relative error stays near a
/// few ulps for `m` up to `10^6` and beyond.
pub fn log_binomial(m: u64, k: u64) -> Result<LogValue> {
    if k > m {
        return Err(Error::Domain(format!("binomial({m}, {k}) requires k <= m")));
    }
    Ok(LogValue(log_binomial_raw(m, k)))
}

pub(crate) fn log_binomial_raw(m: u64, k: u64) -> f64 {
    let k = k.min(m - k);
    if k == 0 {
        return 0.0;
    }
    if k == 1 {
        return (m as f64).ln();
    }
    let j = m - k;
    let (mf, kf, jf) = (m as f64, k as f64, j as f64);
    let main = kf * (mf / kf).ln() - jf * (-kf / mf).ln_1p();
    let half = 0.5 * (mf / (kf * jf)).ln() - HALF_LN_2PI;
    let corr = stirling_remainder(m) - stirling_remainder(k) - stirling_remainder(j);
    main + half + corr
}

/// `ln[ C(λ+1, η) (1-ζ)^(λ+1-η) ζ^η ]`, the binomial subsampling weight.
pub fn log_subsample_weight(lambda: u32, eta: u32, zeta: f64) -> Result<LogValue> {
    if !(0.0..=1.0).contains(&zeta) {
        return domain(format!("sampling rate {zeta} outside [0, 1]"));
    }
    let k = lambda as u64 + 1;
    let eta = eta as u64;
    if eta > k {
        return domain(format!("eta = {eta} exceeds lambda + 1 = {k}"));
    }
    if zeta == 0.0 {
        return Ok(if eta == 0 { LogValue::ONE } else { LogValue::ZERO });
    }
    if zeta == 1.0 {
        return Ok(if eta == k { LogValue::ONE } else { LogValue::ZERO });
    }
    let w = log_binomial_raw(k, eta) + (k - eta) as f64 * (-zeta).ln_1p() + eta as f64 * zeta.ln();
    Ok(LogValue(w))
}

/// Natural logs of small integers, `table[i] = ln i` (`ln 0 = -∞`).
pub(crate) fn ln_table(len: usize) -> &'static [f64] {
    const CACHED: usize = (1 << 16) + 4;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    assert!(len <= CACHED, "ln table request {len} beyond {CACHED}");
    let t = TABLE.get_or_init(|| (0..CACHED).map(|i| (i as f64).ln()).collect());
    &t[..len]
}

/// `ln(1 - ζ + ζ·e^lr)`, the log of a two-component mixture ratio.
#[inline]
pub(crate) fn ln_mixture(zeta: f64, log_ratio: f64) -> f64 {
    if zeta == 0.0 {
        return 0.0;
    }
    if zeta == 1.0 {
        return log_ratio;
    }
    if log_ratio <= 30.0 {
        let u = zeta * log_ratio.exp_m1();
        u.ln_1p()
    } else {
        zeta.ln() + log_ratio + ((1.0 - zeta) / zeta * (-log_ratio).exp()).ln_1p()
    }
}

/// Compensated (Neumaier) summation for long sums of same-sign terms.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if !t.is_finite() {
            self.sum = t;
            self.carry = 0.0;
            return;
        }
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        if self.sum.is_finite() {
            self.sum + self.carry
        } else {
            self.sum
        }
    }
}

pub(crate) const LN2: f64 = LN_2;

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(x: f64) -> LogValue {
        LogValue::new(x).unwrap()
    }

    #[test]
    fn lse_examples() {
        let two = log_sum_exp(&[LogValue::ONE, LogValue::ONE]);
        assert!((two.ln() - 2f64.ln()).abs() < 1e-15);
        assert!(log_sum_exp(&[]).is_zero());
        assert_eq!(log_sum_exp(&[lv(0.0), LogValue::ZERO]).ln(), 0.0);
        assert!(log_sum_exp(&[lv(1.0), LogValue::INFINITY]).is_infinite());
    }

    #[test]
    fn lse_no_overflow() {
        let v = log_sum_exp(&[lv(1000.0), lv(1000.0)]);
        assert!((v.ln() - (1000.0 + LN_2)).abs() < 1e-12);
    }

    #[test]
    fn accumulator_matches_batch() {
        let terms = [-3.0, 12.5, 0.25, -700.0, 12.4, 5.0];
        let mut acc = LogAccumulator::new();
        for t in terms {
            acc.push(t);
        }
        let batch = log_sum_exp(&terms.map(lv));
        assert!((acc.value() - batch.ln()).abs() < 1e-14);
    }

    #[test]
    fn nan_rejected() {
        assert!(LogValue::new(f64::NAN).is_err());
        assert!(LogValue::from_linear(-1.0).is_err());
    }

    #[test]
    fn zero_annihilates_overflow() {
        assert!((LogValue::ZERO * LogValue::INFINITY).is_zero());
        assert_eq!((lv(1.0) * lv(2.0)).ln(), 3.0);
    }

    #[test]
    fn binomial_examples() {
        assert!((log_binomial(5, 2).unwrap().ln() - 10f64.ln()).abs() < 1e-15);
        assert_eq!(log_binomial(7, 0).unwrap().ln(), 0.0);
        assert_eq!(log_binomial(7, 7).unwrap().ln(), 0.0);
        assert!(log_binomial(3, 4).is_err());
    }

    #[test]
    fn binomial_against_log_sums() {
        // Independent route: ln C(m,k) = Σ_{i=1..k} ln((m-k+i)/i).
        for &(m, k) in &[(1000u64, 500u64), (1_000_000, 1), (1_000_000, 3), (1_000_000, 500_000), (40, 17), (16, 8)] {
            let mut oracle = 0.0;
            for i in 1..=k {
                oracle += ((m - k + i) as f64).ln() - (i as f64).ln();
            }
            let got = log_binomial(m, k).unwrap().ln();
            let rel = ((got - oracle) / oracle).abs();
            // The oracle itself accumulates k roundings.
            let tol = if k > 1000 { 1e-11 } else { 1e-12 };
            assert!(rel < tol, "({m},{k}): {got} vs {oracle} rel {rel}");
        }
    }

    #[test]
    fn binomial_1000_500_frozen() {
        // Frozen from the exact cumulative-log oracle above.
        let v = log_binomial(1000, 500).unwrap().ln();
        assert!((v - 689.467_261_567_851_2).abs() / 689.47 < 1e-12, "{v}");
    }

    #[test]
    fn weight_examples() {
        assert_eq!(log_subsample_weight(9, 0, 0.0).unwrap().ln(), 0.0);
        assert!(log_subsample_weight(9, 3, 0.0).unwrap().is_zero());
        assert_eq!(log_subsample_weight(4, 5, 1.0).unwrap().ln(), 0.0);
        let w = log_subsample_weight(2, 1, 0.5).unwrap().exp();
        assert!((w - 0.375).abs() < 1e-15);
        assert!(log_subsample_weight(2, 1, 1.5).is_err());
        assert!(log_subsample_weight(2, 4, 0.5).is_err());
    }

    #[test]
    fn weights_normalize() {
        for &lambda in &[0u32, 1, 7, 64, 512, 4096] {
            for &zeta in &[1e-4, 0.0043, 0.1, 0.5, 0.9, 1.0, 0.0] {
                let terms: Vec<LogValue> = (0..=lambda + 1)
                    .map(|eta| log_subsample_weight(lambda, eta, zeta).unwrap())
                    .collect();
                let total = log_sum_exp(&terms).exp();
                assert!((total - 1.0).abs() < 1e-12, "λ={lambda} ζ={zeta}: {total}");
            }
        }
    }

    #[test]
    fn expm1_minus_x_small_and_large() {
        assert!((expm1_minus_x(1e-5) - 5.000_016_666_708_333e-11).abs() < 1e-24);
        assert!((expm1_minus_x(2.0) - (2f64.exp() - 3.0)).abs() < 1e-15);
        assert!((expm1_minus_x(-0.5) - ((-0.5f64).exp() - 0.5)).abs() < 1e-16);
    }

    #[test]
    fn softplus_extremes() {
        assert_eq!(softplus(f64::NEG_INFINITY), 0.0);
        assert!((softplus(1e3) - 1e3).abs() < 1e-12);
        assert!((softplus(-40.0) - (-40f64).exp()).abs() < 1e-30);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..10_000 {
            s.add(1e-17);
        }
        assert!((s.value() - (1.0 + 1e-13)).abs() < 1e-15);
    }

    #[test]
    fn mixture_log() {
        assert_eq!(ln_mixture(0.0, 5.0), 0.0);
        assert_eq!(ln_mixture(1.0, 5.0), 5.0);
        let direct = (0.9 + 0.1 * 2f64.exp()).ln();
        assert!((ln_mixture(0.1, 2.0) - direct).abs() < 1e-15);
        let big = ln_mixture(0.1, 800.0);
        assert!((big - (800.0 + 0.1f64.ln())).abs() < 1e-12);
    }
}
