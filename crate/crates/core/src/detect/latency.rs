//! Monte Carlo latency profiling of a detector on a single-change stream,
//! and the latency/pre-change-window model used by the separation check.

use rayon::prelude::*;

use super::{Detector, DetectorConfig, StreamDetector};
use crate::env::{draw_reward, ArmModel, RewardFamily};
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Distribution of the monitored stream before and after the change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamModel {
    pub model: ArmModel,
    pub pre_mean: f64,
}

impl StreamModel {
    pub fn bernoulli(pre_mean: f64) -> Self {
        Self {
            model: ArmModel::bernoulli(),
            pre_mean,
        }
    }

    /// Post-change mean: `pre + Δ`, or `pre − Δ` if a Bernoulli mean would leave `[0, 1]`.
    pub fn post_mean(&self, change_gap: f64) -> f64 {
        let up = self.pre_mean + change_gap;
        if self.model.family == RewardFamily::Bernoulli && up > 1.0 {
            self.pre_mean - change_gap
        } else {
            up
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyRequest {
    pub detector: DetectorConfig,
    pub stream: StreamModel,
    pub change_gap: f64,
    /// Horizon `M` of the detection problem.
    pub horizon: usize,
    /// Guaranteed change-free prefix `m`; change placements lie in `(m, M)`.
    pub pre_window: usize,
    pub delta_d: f64,
    /// Monte Carlo runs per placement.
    pub trials: usize,
    /// Number of change placements spread evenly over `(m, M)`.
    pub placements: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyProfile {
    /// Estimated latency `d`.
    pub latency: usize,
    /// `(ν, t_ν)`: smallest `t` with `P̂(τ ≥ ν + t) ≤ δ_D`; `None` when not reached.
    pub per_placement: Vec<(usize, Option<usize>)>,
    /// Fraction of runs that alarmed before their change.
    pub false_alarm_rate: f64,
    /// Mean of `τ − ν` over runs that alarmed at or after the change.
    pub mean_delay: Option<f64>,
    pub warnings: Vec<String>,
}

/// Alarm time of one run: the 1-based sample index, if any within `M`.
fn run_once(req: &LatencyRequest, change_at: usize, trial: usize) -> Result<Option<usize>> {
    let mut rng = rng_for(req.seed, &[change_at as u64, trial as u64]);
    let mut detector = StreamDetector::new(req.detector)?;
    let post = req.stream.post_mean(req.change_gap);
    for n in 1..=req.horizon {
        let mean = if n < change_at { req.stream.pre_mean } else { post };
        if detector.push_and_test(draw_reward(req.stream.model, mean, &mut rng)) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

pub fn measure_latency_profile(req: &LatencyRequest) -> Result<LatencyProfile> {
    req.detector.validate()?;
    if req.pre_window >= req.horizon {
        return Err(Error::Config(format!(
            "pre-change window {} must be below the horizon {}",
            req.pre_window, req.horizon
        )));
    }
    if req.trials == 0 || req.placements == 0 {
        return Err(Error::Config(
            "latency profile needs trials and placements".into(),
        ));
    }
    if !(req.delta_d > 0.0 && req.delta_d <= 1.0) {
        return Err(Error::Config(format!(
            "delta_d must lie in (0, 1], got {}",
            req.delta_d
        )));
    }
    let post = req.stream.post_mean(req.change_gap);
    if req.stream.model.family == RewardFamily::Bernoulli && !(0.0..=1.0).contains(&post) {
        return Err(Error::Config(format!("post-change mean {post} leaves [0, 1]")));
    }

    let mut warnings = Vec::new();
    if req.delta_d < 1.0 && (req.trials as f64) * req.delta_d < 1.0 {
        warnings.push(format!(
            "{} trials cannot resolve delta_d = {}; need at least {}",
            req.trials,
            req.delta_d,
            (1.0 / req.delta_d).ceil()
        ));
    }

    let span = req.horizon - req.pre_window - 1;
    let placements: Vec<usize> = (0..req.placements)
        .map(|j| req.pre_window + 1 + j * span / req.placements)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();

    let jobs: Vec<(usize, usize)> = placements
        .iter()
        .flat_map(|&nu| (0..req.trials).map(move |i| (nu, i)))
        .collect();
    let alarms: Vec<Option<usize>> = jobs
        .par_iter()
        .map(|&(nu, i)| run_once(req, nu, i))
        .collect::<Result<_>>()?;

    // Runs that alarm within the allowed fraction may be late; the rest must not be.
    let allowed = (req.delta_d * req.trials as f64 + 1e-9).floor() as usize;
    let mut per_placement = Vec::with_capacity(placements.len());
    let mut early = 0usize;
    let mut delay_sum = 0.0;
    let mut delay_count = 0usize;
    for (j, &nu) in placements.iter().enumerate() {
        let runs = &alarms[j * req.trials..(j + 1) * req.trials];
        // lateness of each run: None = never alarmed, Some(v) with v = τ − ν (v < 0 early)
        let mut lateness: Vec<Option<i64>> =
            runs.iter().map(|a| a.map(|tau| tau as i64 - nu as i64)).collect();
        for v in lateness.iter().flatten() {
            if *v < 0 {
                early += 1;
            } else {
                delay_sum += *v as f64;
                delay_count += 1;
            }
        }
        // never-alarmed runs are infinitely late
        lateness.sort_by(|a, b| match (a, b) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, _) => std::cmp::Ordering::Less,
            (_, None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => y.cmp(x),
        });
        let t_nu = if allowed >= req.trials {
            Some(0)
        } else {
            lateness[allowed].map(|v| (v + 1).max(0) as usize)
        };
        per_placement.push((nu, t_nu));
    }

    let latency = (0..=req.horizon)
        .find(|&t| {
            per_placement
                .iter()
                .filter(|(nu, _)| *nu + t <= req.horizon)
                .all(|(_, t_nu)| t_nu.is_some_and(|x| x <= t))
        })
        .unwrap_or(req.horizon);

    Ok(LatencyProfile {
        latency,
        per_placement,
        false_alarm_rate: early as f64 / jobs.len() as f64,
        mean_delay: (delay_count > 0).then(|| delay_sum / delay_count as f64),
        warnings,
    })
}

/// Configurable `d(Δ, T)` and `m(Δ, T)` for the separation check:
///
/// ```text
/// d(Δ, T) = ceil( c_d σ² / Δ² · (ln(4 T^{3/2} / δ_F) + ln(1 / δ_D)) )
/// m(Δ, T) = ceil( c_m · d(Δ, T) )
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyModel {
    pub c_d: f64,
    pub c_m: f64,
    pub sigma: f64,
    pub delta_f: f64,
    pub delta_d: f64,
}

impl LatencyModel {
    /// Constants fitted to Bernoulli B-GLR pilot runs (practical threshold, strides 10/5).
    pub fn calibrated(sigma: f64, delta_f: f64, delta_d: f64) -> Self {
        Self {
            c_d: DEFAULT_C_D,
            c_m: DEFAULT_C_M,
            sigma,
            delta_f,
            delta_d,
        }
    }

    pub fn latency(&self, change_gap: f64, horizon: usize) -> f64 {
        let t = horizon as f64;
        let log_terms = (4.0 * t.powf(1.5) / self.delta_f).ln() + (1.0 / self.delta_d).ln();
        (self.c_d * self.sigma * self.sigma / (change_gap * change_gap) * log_terms).ceil()
    }

    pub fn pre_window(&self, change_gap: f64, horizon: usize) -> f64 {
        (self.c_m * self.latency(change_gap, horizon)).ceil()
    }
}

/// Worst ratio of measured to modelled latency over `Δ ∈ {0.2, 0.3, 0.4}`
/// (Bernoulli 0.5 pre-change, `T = 20000`, `δ = T^{-1/2}`, 400 runs).
pub const DEFAULT_C_D: f64 = 3.0;
/// Shorter windows inflated the measured latency at `Δ = 0.2`.
pub const DEFAULT_C_M: f64 = 4.0;
