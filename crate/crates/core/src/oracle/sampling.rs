//! Seeded random instances for majorization and Schur-convexity checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientStyle {
    Sphere,
    Ball,
    Sparse,
}

fn gaussian_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// A vector in `R^n` with `‖g‖₂ ≤ clip`, drawn on the sphere, in the ball,
/// or as a few spikes, with the style itself chosen by the seed.
pub fn sample_clipped_gradient(n: usize, clip: f64, seed: u64) -> Result<(Vec<f64>, GradientStyle)> {
    if n < 1 {
        return domain("gradient dimension must be >= 1");
    }
    if !(clip >= 0.0) || !clip.is_finite() {
        return domain(format!("clip must be finite and >= 0, got {clip}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let style = [GradientStyle::Sphere, GradientStyle::Ball, GradientStyle::Sparse][rng.gen_range(0..3)];
    let mut g = match style {
        GradientStyle::Sphere => gaussian_direction(&mut rng, n).into_iter().map(|x| x * clip).collect(),
        GradientStyle::Ball => {
            let radius = clip * rng.gen::<f64>().powf(1.0 / n as f64);
            gaussian_direction(&mut rng, n).into_iter().map(|x| x * radius).collect()
        }
        GradientStyle::Sparse => {
            let spikes = rng.gen_range(1..=n.min(4));
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let dir = gaussian_direction(&mut rng, spikes);
            let radius = clip * rng.gen::<f64>().sqrt();
            let mut g = vec![0.0; n];
            for (k, &i) in idx[..spikes].iter().enumerate() {
                g[i] = dir[k] * radius;
            }
            g
        }
    };
    // Rounding can push the norm a hair past the clip.
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > clip {
        let s = clip / norm;
        g.iter_mut().for_each(|x| *x *= s);
    }
    Ok((g, style))
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `x ≺ y`: equal totals (to `tol`) and every prefix sum of sorted `y`
/// at least that of sorted `x`.
pub fn majorizes(y: &[f64], x: &[f64], tol: f64) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let (xs, ys) = (sorted_desc(x), sorted_desc(y));
    let (mut px, mut py) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        if py < px - tol {
            return false;
        }
    }
    (px - py).abs() <= tol
}

/// Moves mass from a smaller coordinate of `x` to a larger one, producing
/// `y` with `x ≺ y` and the same total. The amount is a random fraction of
/// the smaller coordinate. Returns `(x, x)` when nothing can move.
pub fn robin_hood_pair(x: &[f64], seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() < 2 {
        return domain("a transfer needs at least two coordinates");
    }
    if x.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return domain("coordinates must be finite and nonnegative");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = rng.gen_range(0..x.len());
    let mut j = rng.gen_range(0..x.len() - 1);
    if j >= i {
        j += 1;
    }
    // j donates, i receives.
    if x[j] > x[i] || (x[j] == x[i] && j < i) {
        std::mem::swap(&mut i, &mut j);
    }
    let amount = rng.gen::<f64>() * x[j];
    let mut y = x.to_vec();
    if amount > 0.0 {
        y[i] += amount;
        y[j] -= amount;
    }
    let scale = x.iter().sum::<f64>().max(1.0);
    if !majorizes(&y, x, 1e-12 * scale) {
        return Ok((x.to_vec(), x.to_vec()));
    }
    Ok((x.to_vec(), y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_respect_clip_and_seed() {
        for seed in 0..200 {
            for n in [1usize, 2, 7, 64] {
                let (g, _) = sample_clipped_gradient(n, 1.5, seed).unwrap();
                assert_eq!(g.len(), n);
                assert!(g.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1.5 + 1e-12);
                assert_eq!(g, sample_clipped_gradient(n, 1.5, seed).unwrap().0);
            }
        }
        let styles: std::collections::HashSet<_> = (0..30).map(|s| sample_clipped_gradient(5, 1.0, s).unwrap().1).collect();
        assert_eq!(styles.len(), 3);
    }

    #[test]
    fn transfer_on_two_equal_coordinates() {
        let (x, y) = robin_hood_pair(&[1.0, 1.0], 3).unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
        assert!(y[0] != 1.0);
        assert!((y[0] - 1.0) * (y[1] - 1.0) < 0.0);
        assert!((y[0] + y[1] - 2.0).abs() < 1e-12);
        assert!(majorizes(&y, &x, 1e-12));
    }

    #[test]
    fn zero_vector_is_returned_unchanged() {
        let (x, y) = robin_hood_pair(&[0.0, 0.0, 0.0], 1).unwrap();
        assert_eq!(x, y);
        assert!(robin_hood_pair(&[1.0], 1).is_err());
    }

    #[test]
    fn majorization_check() {
        assert!(majorizes(&[3.0, 0.0], &[1.5, 1.5], 0.0));
        assert!(!majorizes(&[1.5, 1.5], &[3.0, 0.0], 0.0));
        assert!(!majorizes(&[3.0, 1.0], &[1.5, 1.5], 0.0));
    }
}
