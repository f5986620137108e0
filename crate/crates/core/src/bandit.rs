//! Stationary index policies (UCB, klUCB, MOSS).
//!
//! A policy only ever sees the samples it chose itself. Its step counter
//! `t_B` is the number of pulls it has been updated with since the last reset.

use crate::error::{Error, Result};
use crate::kl::{clamp_mean, kl_bernoulli};

/// Behaviour every stationary learner plugged into the composer must offer.
pub trait BanditPolicy {
    fn num_arms(&self) -> usize;

    /// Arm to pull next. Never-pulled arms come first, lowest index wins ties.
    fn select(&self) -> usize;

    fn update(&mut self, arm: usize, reward: f64);

    /// Forget all observations, keep hyper-parameters.
    fn reset(&mut self);

    /// Number of observations since the last reset.
    fn steps(&self) -> u64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// `μ̂ + √(2σ² ln t / n)`.
    Ucb { sigma: f64 },
    /// Largest `q` with `n·kl(μ̂, q) ≤ ln t + c·ln ln t`.
    KlUcb { c: f64 },
    /// `μ̂ + σ·√(max(0, ln(T/(A n))) / n)`.
    Moss { sigma: f64, horizon: usize },
}

impl PolicyKind {
    /// Short label used in combo names: `UCB`, `klUCB`, `MOSS`.
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::Ucb { .. } => "UCB",
            PolicyKind::KlUcb { .. } => "klUCB",
            PolicyKind::Moss { .. } => "MOSS",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PolicyKind::Ucb { sigma } | PolicyKind::Moss { sigma, .. }
                if !(sigma > 0.0 && sigma.is_finite()) =>
            {
                Err(Error::Config(format!(
                    "policy sigma must be positive, got {sigma}"
                )))
            }
            PolicyKind::KlUcb { c } if !(c >= 0.0 && c.is_finite()) => Err(Error::Config(format!(
                "klUCB constant must be non-negative, got {c}"
            ))),
            PolicyKind::Moss { horizon: 0, .. } => {
                Err(Error::Config("MOSS horizon must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

pub fn ucb_index(mean: f64, pulls: u64, step: u64, sigma: f64) -> f64 {
    assert!(pulls >= 1, "UCB index needs at least one pull");
    let t = step.max(1) as f64;
    mean + (2.0 * sigma * sigma * t.ln() / pulls as f64).sqrt()
}

/// Exploration level `ln t + c ln ln t`, with `ln ln t` clamped to 0 for `t < 3`.
pub fn klucb_threshold(step: u64, c: f64) -> f64 {
    let log_t = (step.max(1) as f64).ln();
    let log_log_t = if step < 3 { 0.0 } else { log_t.ln() };
    log_t + c * log_log_t
}

pub fn klucb_index(mean: f64, pulls: u64, step: u64, c: f64) -> f64 {
    assert!(pulls >= 1, "klUCB index needs at least one pull");
    let p = clamp_mean(mean);
    let budget = klucb_threshold(step, c) / pulls as f64;
    // Bisect down to adjacent floats: near 1 the divergence is steep in q,
    // and a coarser bracket leaves a visible residual in n·kl.
    let budget_total = klucb_threshold(step, c);
    let (mut lo, mut hi) = (p, 1.0);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kl_bernoulli(p, mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let n = pulls as f64;
    if hi < 1.0
        && (n * kl_bernoulli(p, hi) - budget_total).abs() < (n * kl_bernoulli(p, lo) - budget_total).abs()
    {
        hi
    } else {
        lo
    }
}

pub fn moss_index(mean: f64, pulls: u64, horizon: usize, arms: usize, sigma: f64) -> f64 {
    assert!(pulls >= 1, "MOSS index needs at least one pull");
    let n = pulls as f64;
    let log_term = (horizon as f64 / (arms as f64 * n)).ln().max(0.0);
    mean + sigma * (log_term / n).sqrt()
}

/// Per-arm counts and sums behind an index rule.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexPolicy {
    kind: PolicyKind,
    counts: Vec<u64>,
    sums: Vec<f64>,
    steps: u64,
}

impl IndexPolicy {
    pub fn new(kind: PolicyKind, num_arms: usize) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::Config(format!("need at least 2 arms, got {num_arms}")));
        }
        kind.validate()?;
        Ok(Self {
            kind,
            counts: vec![0; num_arms],
            sums: vec![0.0; num_arms],
            steps: 0,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn empirical_mean(&self, arm: usize) -> Option<f64> {
        (self.counts[arm] > 0).then(|| self.sums[arm] / self.counts[arm] as f64)
    }

    /// Index of `arm`; `None` while the arm is unpulled.
    pub fn index(&self, arm: usize) -> Option<f64> {
        let n = self.counts[arm];
        let mean = self.empirical_mean(arm)?;
        Some(match self.kind {
            PolicyKind::Ucb { sigma } => ucb_index(mean, n, self.steps, sigma),
            PolicyKind::KlUcb { c } => klucb_index(mean, n, self.steps, c),
            PolicyKind::Moss { sigma, horizon } => moss_index(mean, n, horizon, self.counts.len(), sigma),
        })
    }
}

impl BanditPolicy for IndexPolicy {
    fn num_arms(&self) -> usize {
        self.counts.len()
    }

    fn select(&self) -> usize {
        if let Some(arm) = self.counts.iter().position(|&n| n == 0) {
            return arm;
        }
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for arm in 0..self.counts.len() {
            let idx = self.index(arm).unwrap_or(f64::INFINITY);
            if idx > best_index {
                best = arm;
                best_index = idx;
            }
        }
        best
    }

    fn update(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        self.steps += 1;
    }

    fn reset(&mut self) {
        self.counts.iter_mut().for_each(|n| *n = 0);
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.steps = 0;
    }

    fn steps(&self) -> u64 {
        self.steps
    }
}
