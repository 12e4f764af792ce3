//! Adaptive Gauss–Kronrod (7/15) integration of positive integrands given by
//! their logarithm.

use std::cell::Cell;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_PANELS: usize = 20_000;

/// `(kronrod, |kronrod - gauss|)` on one panel.
fn panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// `∫ f` over the given consecutive pieces, bisecting the panel with the
/// largest error until the summed error is within `rel_tol` of the total.
fn adaptive(f: &dyn Fn(f64) -> f64, pieces: &[(f64, f64)], rel_tol: f64) -> Result<(f64, f64)> {
    let mut heap = BinaryHeap::new();
    let (mut total, mut error) = (0.0, 0.0);
    for &(a, b) in pieces {
        if b > a {
            let (value, err) = panel(f, a, b);
            total += value;
            error += err;
            heap.push(Panel { a, b, value, error: err });
        }
    }
    let mut panels = heap.len();
    while error > rel_tol * total.abs() && error > f64::MIN_POSITIVE {
        let Some(p) = heap.pop() else { break };
        if panels >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "{panels} panels used; error estimate {error:e} against integral {total:e}"
            )));
        }
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::Quadrature(format!("panel [{}, {}] cannot be split further", p.a, p.b)));
        }
        let (v1, e1) = panel(f, p.a, mid);
        let (v2, e2) = panel(f, mid, p.b);
        total += v1 + v2 - p.value;
        error += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: p.b, value: v2, error: e2 });
        panels += 1;
    }
    // Re-sum to shed drift from the running updates.
    let (mut t, mut e) = (0.0, 0.0);
    for p in heap.iter() {
        t += p.value;
        e += p.error;
    }
    Ok((t, e))
}

/// Natural log of an integral and its relative error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral {
    pub log_value: f64,
    /// Bound on the relative error of `exp(log_value)`, which is also an
    /// absolute bound on `log_value` to first order.
    pub rel_error: f64,
}

/// `ln ∫_ℝ exp(ln_f(z)) dz`.
///
/// The real line is cut at `breakpoints` and truncated `60·scale` beyond the
/// outermost ones; the window doubles until `exp(ln_f(edge))·scale` on both
/// sides is below `1e-14` of the integral. That tail bound is exact for
/// integrands decaying like `e^{-|z|/scale}` and conservative for lighter
/// tails.
pub fn integrate_log(ln_f: &dyn Fn(f64) -> f64, breakpoints: &[f64], scale: f64, rel_tol: f64) -> Result<LogIntegral> {
    let mut pts: Vec<f64> = breakpoints.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    let mut reach = 60.0 * scale;
    for _ in 0..8 {
        let (left, right) = (lo - reach, hi + reach);
        let mut nodes = vec![left];
        nodes.extend(&pts);
        nodes.push(right);
        let pieces: Vec<(f64, f64)> = nodes.windows(2).map(|w| (w[0], w[1])).collect();

        let mut shift = f64::NEG_INFINITY;
        for &(a, b) in &pieces {
            for i in 0..=32 {
                shift = shift.max(ln_f(a + (b - a) * i as f64 / 32.0));
            }
        }
        if !shift.is_finite() {
            return Err(Error::Quadrature(format!("integrand is not finite near its peak ({shift})")));
        }
        let (value, error, shift) = loop {
            let seen = Cell::new(f64::NEG_INFINITY);
            let scaled = |z: f64| {
                let l = ln_f(z);
                if l > seen.get() {
                    seen.set(l);
                }
                (l - shift).exp()
            };
            let (v, e) = adaptive(&scaled, &pieces, rel_tol)?;
            if seen.get() > shift + 300.0 {
                shift = seen.get();
                continue;
            }
            break (v, e, shift);
        };
        if !(value > 0.0) {
            return Err(Error::Quadrature("integral vanished after scaling".into()));
        }
        let tail = ((ln_f(left) - shift).exp() + (ln_f(right) - shift).exp()) * scale;
        if tail < 1e-14 * value {
            return Ok(LogIntegral {
                log_value: shift + value.ln(),
                rel_error: (error + tail) / value,
            });
        }
        reach *= 2.0;
    }
    Err(Error::Quadrature(format!(
        "tails still above 1e-14 of the integral at {reach} from the breakpoints"
    )))
}
