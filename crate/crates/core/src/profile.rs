//! Moment bounds over an integer order grid.

use serde::Serialize;

use crate::config::Mechanism;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    PerStep,
    Composed,
}

/// `α(λ)` on a strictly increasing grid of orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentProfile {
    pub mechanism: Mechanism,
    pub scope: Scope,
    lambdas: Vec<u32>,
    alphas: Vec<f64>,
}

impl MomentProfile {
    pub fn new(mechanism: Mechanism, scope: Scope, lambdas: Vec<u32>, alphas: Vec<f64>) -> Result<Self> {
        if lambdas.len() != alphas.len() {
            return Err(Error::Invariant(format!(
                "{} orders but {} moment values",
                lambdas.len(),
                alphas.len()
            )));
        }
        if lambdas.is_empty() {
            return Err(Error::Domain("moment profile is empty".into()));
        }
        if lambdas.windows(2).any(|w| w[0] >= w[1]) || lambdas[0] == 0 {
            return Err(Error::Invariant("orders must be positive and strictly increasing".into()));
        }
        if let Some(a) = alphas.iter().find(|a| a.is_nan()) {
            return Err(Error::Invariant(format!("moment value {a}")));
        }
        Ok(MomentProfile {
            mechanism,
            scope,
            lambdas,
            alphas,
        })
    }

    /// Per-step profile on the grid `1..=lambda_max`.
    pub fn per_step(mechanism: Mechanism, alphas: Vec<f64>) -> Result<Self> {
        let lambdas = (1..=alphas.len() as u32).collect();
        Self::new(mechanism, Scope::PerStep, lambdas, alphas)
    }

    pub fn lambdas(&self) -> &[u32] {
        &self.lambdas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.lambdas.iter().copied().zip(self.alphas.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn alpha_at(&self, lambda: u32) -> Option<f64> {
        self.lambdas.binary_search(&lambda).ok().map(|i| self.alphas[i])
    }

    /// True when every value is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.alphas.iter().all(|&a| a == 0.0)
    }

    /// Checks `α ≥ 0`, nondecreasing, and discretely convex on consecutive
    /// orders, each within `slack`. Infinite tails are accepted.
    pub fn check_shape(&self, slack: f64) -> Result<()> {
        let a = &self.alphas;
        for (i, &v) in a.iter().enumerate() {
            if v < -slack {
                return Err(Error::Invariant(format!("α({}) = {v} is negative", self.lambdas[i])));
            }
        }
        for i in 1..a.len() {
            if a[i] < a[i - 1] - slack {
                return Err(Error::Invariant(format!(
                    "α decreases between λ = {} and {}",
                    self.lambdas[i - 1],
                    self.lambdas[i]
                )));
            }
        }
        for i in 2..a.len() {
            let consecutive = self.lambdas[i] == self.lambdas[i - 1] + 1 && self.lambdas[i - 1] == self.lambdas[i - 2] + 1;
            if !consecutive || a[i].is_infinite() {
                continue;
            }
            let curvature = (a[i] - a[i - 1]) - (a[i - 1] - a[i - 2]);
            if curvature < -slack * (1.0 + a[i].abs()) {
                return Err(Error::Invariant(format!(
                    "α is not convex at λ = {} (second difference {curvature})",
                    self.lambdas[i - 1]
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn scaled(&self, factor: f64, scope: Scope) -> MomentProfile {
        MomentProfile {
            mechanism: self.mechanism,
            scope,
            lambdas: self.lambdas.clone(),
            alphas: self.alphas.iter().map(|&a| if a == 0.0 { 0.0 } else { a * factor }).collect(),
        }
    }
}
