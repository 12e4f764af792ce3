//! Subsampled Gaussian moments accountant, used as a baseline.
//!
//! With noise multiplier `σ` (noise standard deviation over clip), the
//! per-step bound is
//! `ln Σ_η C(λ+1, η)(1-ζ)^{λ+1-η} ζ^η exp((η² - η)/(2σ²))`.

use crate::config::{GaussianVariant, Mechanism, MechanismConfig};
use crate::error::{domain, Error, Result};
use crate::numerics::{ln_table, log_binomial_raw, softplus};

/// Terms further than this below the largest one are skipped, in nats.
const TERM_CUTOFF: f64 = 41.5;

/// `ln(e^x - 1)` for `x > 0`.
fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// Per-step Gaussian bound at a fixed `(σ, ζ)` for any number of orders.
#[derive(Debug, Clone)]
pub struct GaussianMoments {
    sigma: f64,
    zeta: f64,
    variant: GaussianVariant,
    // ln(exp(η(η-1)/(2σ²)) - 1), indexed by η.
    ln_kernel_excess: Vec<f64>,
    scratch: Vec<f64>,
}

impl GaussianMoments {
    pub fn new(sigma: f64, zeta: f64, variant: GaussianVariant) -> Result<Self> {
        if !(sigma > 0.0) {
            return domain(format!("noise multiplier must be > 0, got {sigma}"));
        }
        if !(0.0..=1.0).contains(&zeta) {
            return domain(format!("sampling rate {zeta} outside [0, 1]"));
        }
        Ok(GaussianMoments {
            sigma,
            zeta,
            variant,
            ln_kernel_excess: vec![f64::NEG_INFINITY; 2],
            scratch: Vec::new(),
        })
    }

    fn extend_to(&mut self, eta_max: usize) {
        let inv = 1.0 / (2.0 * self.sigma * self.sigma);
        while self.ln_kernel_excess.len() <= eta_max {
            let eta = self.ln_kernel_excess.len() as f64;
            self.ln_kernel_excess.push(ln_expm1(eta * (eta - 1.0) * inv));
        }
    }

    /// `ln Σ_{η=2}^{k} C(k, η)(1-ζ)^{k-η} ζ^η (K_η - 1)`.
    fn ln_binomial_excess(&mut self, k: usize) -> f64 {
        let zeta = self.zeta;
        if k < 2 || zeta == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.extend_to(k);
        if zeta == 1.0 {
            return self.ln_kernel_excess[k];
        }
        if self.sigma.is_infinite() {
            return f64::NEG_INFINITY;
        }
        let ln_int = ln_table(k + 2);
        let ln_zeta = zeta.ln();
        let ln_keep = (-zeta).ln_1p();
        let ln_odds = ln_zeta - ln_keep;
        let terms = &mut self.scratch;
        terms.clear();
        let mut ln_weight = log_binomial_raw(k as u64, 2) + (k - 2) as f64 * ln_keep + 2.0 * ln_zeta;
        let mut top = f64::NEG_INFINITY;
        for eta in 2..=k {
            if eta > 2 {
                ln_weight += ln_int[k - eta + 1] - ln_int[eta] + ln_odds;
            }
            let t = ln_weight + self.ln_kernel_excess[eta];
            top = top.max(t);
            terms.push(t);
        }
        if top == f64::INFINITY {
            return top;
        }
        let floor = top - TERM_CUTOFF;
        let sum: f64 = terms.iter().filter(|&&t| t > floor).map(|&t| (t - top).exp()).sum();
        top + sum.ln()
    }

    /// Per-step bound at one order. `PaperExact` may be negative or `-∞`.
    pub fn alpha(&mut self, lambda: u32) -> f64 {
        let l = lambda as usize;
        match self.variant {
            GaussianVariant::Normalized => softplus(self.ln_binomial_excess(l + 1)),
            GaussianVariant::PaperExact => {
                // Σ C(λ, η)(1-ζ)^{λ+1-η} ζ^η K_η = (1-ζ) Σ C(λ, η)(1-ζ)^{λ-η} ζ^η K_η
                (-self.zeta).ln_1p() + softplus(self.ln_binomial_excess(l))
            }
        }
    }

    pub fn alphas(&mut self, lambdas: &[u32]) -> Vec<f64> {
        lambdas.iter().map(|&l| self.alpha(l)).collect()
    }
}

/// Per-step Gaussian bound for noise multiplier `sigma`.
pub fn alpha_gaussian(sigma: f64, zeta: f64, lambda: u32, variant: GaussianVariant) -> Result<f64> {
    Ok(GaussianMoments::new(sigma, zeta, variant)?.alpha(lambda))
}

/// Noise multiplier implied by a configuration: noise standard deviation over
/// clip. Infinite when the clip is zero.
pub fn noise_multiplier(cfg: &MechanismConfig) -> f64 {
    cfg.noise_scale / cfg.clip
}

/// Per-step bounds for `λ = 1..=lambda_max`.
pub fn gaussian_profile(cfg: &MechanismConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if cfg.mechanism != Mechanism::Gaussian {
        return Err(Error::Config(format!(
            "Gaussian bound needs mechanism gaussian, got {}",
            cfg.mechanism.name()
        )));
    }
    let lambdas: Vec<u32> = (1..=cfg.lambda_max).collect();
    let sigma = noise_multiplier(cfg);
    Ok(GaussianMoments::new(sigma, cfg.sampling_rate, cfg.gaussian_variant)?.alphas(&lambdas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{log_subsample_weight, log_sum_exp, LogValue};

    fn direct(sigma: f64, zeta: f64, lambda: u32) -> f64 {
        let terms: Vec<LogValue> = (0..=lambda + 1)
            .map(|eta| {
                let e = eta as f64;
                log_subsample_weight(lambda, eta, zeta).unwrap()
                    * LogValue::new((e * e - e) / (2.0 * sigma * sigma)).unwrap()
            })
            .collect();
        log_sum_exp(&terms).ln()
    }

    #[test]
    fn examples() {
        let n = GaussianVariant::Normalized;
        assert_eq!(alpha_gaussian(1.0, 0.0, 9, n).unwrap(), 0.0);
        assert!((alpha_gaussian(1.0, 1.0, 1, n).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(alpha_gaussian(1.0, 0.3, 0, n).unwrap(), 0.0);
        assert!(alpha_gaussian(0.0, 0.3, 1, n).is_err());
        assert_eq!(alpha_gaussian(f64::INFINITY, 0.3, 5, n).unwrap(), 0.0);
    }

    #[test]
    fn matches_direct_sum() {
        for &sigma in &[0.5, 1.0, 2.0, 4.0] {
            for &zeta in &[1e-3, 0.01, 0.1, 0.6] {
                for &lambda in &[1u32, 3, 8, 64, 400] {
                    let got = alpha_gaussian(sigma, zeta, lambda, GaussianVariant::Normalized).unwrap();
                    let want = direct(sigma, zeta, lambda);
                    assert!((got - want).abs() <= 1e-10 * want + 1e-15, "σ={sigma} ζ={zeta} λ={lambda}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn paper_exact_sums_to_one_minus_rate() {
        // With an enormous σ every kernel is one, leaving ln(1 - ζ).
        let a = alpha_gaussian(1e12, 0.2, 6, GaussianVariant::PaperExact).unwrap();
        assert!((a - 0.8f64.ln()).abs() < 1e-12);
        assert_eq!(alpha_gaussian(1.0, 1.0, 3, GaussianVariant::PaperExact).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn paper_exact_matches_its_printed_sum() {
        let (sigma, zeta, lambda) = (1.5f64, 0.05f64, 12u32);
        let mut terms = Vec::new();
        for eta in 0..=lambda {
            let e = eta as f64;
            let w = log_binomial_raw(lambda as u64, eta as u64)
                + (lambda + 1 - eta) as f64 * (1.0 - zeta).ln()
                + e * zeta.ln();
            terms.push(LogValue::new(w + (e * e - e) / (2.0 * sigma * sigma)).unwrap());
        }
        let want = log_sum_exp(&terms).ln();
        let got = alpha_gaussian(sigma, zeta, lambda, GaussianVariant::PaperExact).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn monotone_in_sigma_and_rate() {
        let v = GaussianVariant::Normalized;
        let mut prev = f64::INFINITY;
        for &s in &[0.5, 0.8, 1.0, 2.0, 5.0] {
            let a = alpha_gaussian(s, 0.05, 16, v).unwrap();
            assert!(a <= prev);
            prev = a;
        }
        let mut prev = 0.0;
        for &z in &[0.0, 0.001, 0.01, 0.3, 1.0] {
            let a = alpha_gaussian(1.0, z, 16, v).unwrap();
            assert!(a >= prev);
            prev = a;
        }
    }
}
