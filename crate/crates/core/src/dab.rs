//! Detection-augmented bandit (DAB) composer.
//!
//! Each step `t` computes `r = (t − τ − 1) mod P_k`. For `r < A` arm `r` is
//! force-explored and its reward goes to the detectors only; otherwise the
//! stationary policy picks the arm and is updated with the reward. The reward
//! is then pushed to the pulled arm's detector, and an alarm triggers a global
//! restart: `τ ← t`, every detector and the policy are reset, and `k ← k + 1`.
//! The exploration period is `P_k = ⌈A / α_k⌉` with `α_k = α₀ √(k A ln T / T)`.

use std::fmt::Write as _;

use rand::Rng;

use crate::bandit::BanditPolicy;
use crate::detect::Detector;
use crate::env::{draw_reward, PiecewiseInstance};
use crate::error::{Error, Result};

/// Which samples reach the detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeedMode {
    /// Every pulled sample, forced or not.
    #[default]
    AllSamples,
    /// Forced-exploration samples only.
    ForcedOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DabConfig {
    pub num_arms: usize,
    pub horizon: usize,
    /// Exploration scale `α₀`; `0` disables forced exploration.
    pub alpha0: f64,
    /// `δ_F = δ_D = T^{-γ}`.
    pub gamma: f64,
    pub feed: FeedMode,
}

impl DabConfig {
    pub fn new(num_arms: usize, horizon: usize, alpha0: f64, gamma: f64) -> Self {
        Self {
            num_arms,
            horizon,
            alpha0,
            gamma,
            feed: FeedMode::AllSamples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_arms < 2 {
            return Err(Error::Config(format!(
                "need at least 2 arms, got {}",
                self.num_arms
            )));
        }
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if !(self.alpha0 >= 0.0 && self.alpha0.is_finite()) {
            return Err(Error::Config(format!(
                "alpha0 must be non-negative, got {}",
                self.alpha0
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// `δ_F = δ_D = T^{-γ}`.
    pub fn delta(&self) -> f64 {
        (self.horizon as f64).powf(-self.gamma)
    }

    pub fn schedule(&self, interval: usize) -> ExplorationSchedule {
        exploration_frequency(interval, self.alpha0, self.num_arms, self.horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplorationSchedule {
    pub alpha: f64,
    /// `⌈A / α_k⌉`; `None` when forced exploration is off.
    pub period: Option<usize>,
    /// `α_k ≥ 1` was clamped to pure round-robin (`P_k = A`).
    pub clamped: bool,
}

pub fn exploration_frequency(
    interval: usize,
    alpha0: f64,
    num_arms: usize,
    horizon: usize,
) -> ExplorationSchedule {
    assert!(interval >= 1, "interval index starts at 1");
    let t = horizon as f64;
    let alpha = alpha0 * (interval as f64 * num_arms as f64 * t.ln() / t).sqrt();
    if alpha.is_nan() || alpha <= 0.0 {
        return ExplorationSchedule {
            alpha: 0.0,
            period: None,
            clamped: false,
        };
    }
    if alpha >= 1.0 {
        return ExplorationSchedule {
            alpha,
            period: Some(num_arms),
            clamped: true,
        };
    }
    let period = (num_arms as f64 / alpha).ceil() as usize;
    ExplorationSchedule {
        alpha,
        period: Some(period.max(num_arms)),
        clamped: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Restart {
    /// Alarm time; the new interval starts at `time + 1`.
    pub time: usize,
    /// Interval counter `k` after the restart.
    pub interval: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub arm: usize,
    pub reward: f64,
    pub forced: bool,
    pub restarted: bool,
}

/// Running state of one DAB episode.
#[derive(Debug, Clone)]
pub struct Dab<P, D> {
    cfg: DabConfig,
    policy: P,
    detectors: Vec<D>,
    t: usize,
    last_restart: usize,
    interval: usize,
    schedule: ExplorationSchedule,
    restarts: Vec<Restart>,
    clamp_warnings: usize,
}

impl<P: BanditPolicy, D: Detector + Clone> Dab<P, D> {
    /// Builds the composer with one copy of `detector` per arm. Both the
    /// policy and the detector are reset first.
    pub fn new(cfg: DabConfig, mut policy: P, mut detector: D) -> Result<Self> {
        cfg.validate()?;
        if policy.num_arms() != cfg.num_arms {
            return Err(Error::Config(format!(
                "policy has {} arms, configuration has {}",
                policy.num_arms(),
                cfg.num_arms
            )));
        }
        policy.reset();
        detector.reset();
        let schedule = cfg.schedule(1);
        Ok(Self {
            cfg,
            policy,
            detectors: vec![detector; cfg.num_arms],
            t: 0,
            last_restart: 0,
            interval: 1,
            schedule,
            restarts: Vec::new(),
            clamp_warnings: usize::from(schedule.clamped),
        })
    }
}

impl<P: BanditPolicy, D: Detector> Dab<P, D> {
    pub fn config(&self) -> &DabConfig {
        &self.cfg
    }

    pub fn policy(&self) -> &P {
        &self.policy
    }

    pub fn detectors(&self) -> &[D] {
        &self.detectors
    }

    /// Last completed time step (0 before the first step).
    pub fn time(&self) -> usize {
        self.t
    }

    pub fn last_restart(&self) -> usize {
        self.last_restart
    }

    pub fn interval(&self) -> usize {
        self.interval
    }

    pub fn schedule(&self) -> ExplorationSchedule {
        self.schedule
    }

    pub fn restarts(&self) -> &[Restart] {
        &self.restarts
    }

    /// Number of intervals whose `α_k` had to be clamped to round-robin.
    pub fn clamp_warnings(&self) -> usize {
        self.clamp_warnings
    }

    /// Arm forced at time `t` under the current schedule, if any.
    pub fn forced_arm(&self, t: usize) -> Option<usize> {
        let period = self.schedule.period?;
        let r = (t - self.last_restart - 1) % period;
        (r < self.cfg.num_arms).then_some(r)
    }

    /// Plays time step `t + 1`; `sample(arm, t)` draws the reward.
    pub fn step<F: FnMut(usize, usize) -> f64>(&mut self, mut sample: F) -> Result<StepOutcome> {
        let t = self.t + 1;
        if t > self.cfg.horizon {
            return Err(Error::InvalidArgument(format!(
                "step {t} beyond horizon {}",
                self.cfg.horizon
            )));
        }
        self.t = t;
        let (arm, forced) = match self.forced_arm(t) {
            Some(arm) => (arm, true),
            None => (self.policy.select(), false),
        };
        let reward = sample(arm, t);
        if !forced {
            self.policy.update(arm, reward);
        }
        let feed = forced || self.cfg.feed == FeedMode::AllSamples;
        let restarted = feed && self.detectors[arm].push_and_test(reward);
        if restarted {
            self.restart(t);
        }
        Ok(StepOutcome {
            arm,
            reward,
            forced,
            restarted,
        })
    }

    fn restart(&mut self, t: usize) {
        self.last_restart = t;
        self.detectors.iter_mut().for_each(Detector::reset);
        self.policy.reset();
        self.interval += 1;
        self.schedule = self.cfg.schedule(self.interval);
        if self.schedule.clamped {
            self.clamp_warnings += 1;
        }
        self.restarts.push(Restart {
            time: t,
            interval: self.interval,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub arm: usize,
    pub forced: bool,
    pub reward: f64,
    pub instant_regret: f64,
    pub cumulative_regret: f64,
    pub restarted: bool,
}

/// Full trajectory of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub steps: Vec<StepRecord>,
    pub restarts: Vec<Restart>,
    pub final_regret: f64,
    pub clamp_warnings: usize,
}

impl TrialRecord {
    pub fn arms(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.arm)
    }

    pub fn restart_times(&self) -> Vec<usize> {
        self.restarts.iter().map(|r| r.time).collect()
    }

    /// Cumulative regret after step `t` (1-based); 0 for `t = 0`.
    pub fn cumulative_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.steps[t - 1].cumulative_regret
        }
    }

    /// CSV with header `t,arm,forced,reward,instant_regret,cumulative_regret,restart`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,arm,forced,reward,instant_regret,cumulative_regret,restart\n");
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.t,
                s.arm,
                u8::from(s.forced),
                s.reward,
                s.instant_regret,
                s.cumulative_regret,
                u8::from(s.restarted)
            );
        }
        out
    }
}

/// Runs `dab` over the whole horizon of `instance`, drawing rewards from `rng`.
pub fn run_episode<P, D, R>(
    mut dab: Dab<P, D>,
    instance: &PiecewiseInstance,
    rng: &mut R,
) -> Result<TrialRecord>
where
    P: BanditPolicy,
    D: Detector,
    R: Rng + ?Sized,
{
    let cfg = *dab.config();
    if cfg.num_arms != instance.num_arms() || cfg.horizon != instance.horizon() {
        return Err(Error::Config(format!(
            "composer is {} arms x {} steps, instance is {} arms x {} steps",
            cfg.num_arms,
            cfg.horizon,
            instance.num_arms(),
            instance.horizon()
        )));
    }
    let model = instance.arm_model();
    let mut steps = Vec::with_capacity(cfg.horizon);
    let mut cumulative = 0.0;
    let mut k = 0;
    for t in 1..=cfg.horizon {
        if k < instance.num_changes() && instance.change_points()[k] == t {
            k += 1;
        }
        let means = &instance.means()[k];
        let out = dab.step(|arm, _| draw_reward(model, means[arm], rng))?;
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let instant_regret = best - means[out.arm];
        cumulative += instant_regret;
        steps.push(StepRecord {
            t,
            arm: out.arm,
            forced: out.forced,
            reward: out.reward,
            instant_regret,
            cumulative_regret: cumulative,
            restarted: out.restarted,
        });
    }
    Ok(TrialRecord {
        steps,
        restarts: dab.restarts().to_vec(),
        final_regret: cumulative,
        clamp_warnings: dab.clamp_warnings(),
    })
}

/// Per-change-point outcome of the separation check `d_{k−1} + m_k ≤ ν_k − ν_{k−1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationEntry {
    /// 1-based change-point index.
    pub k: usize,
    pub spacing: usize,
    pub pre_window: f64,
    pub previous_latency: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub entries: Vec<SeparationEntry>,
}

impl SeparationReport {
    /// Fraction of change-points meeting the condition; `None` without change-points.
    pub fn fraction_satisfied(&self) -> Option<f64> {
        if self.entries.is_empty() {
            return None;
        }
        let ok = self.entries.iter().filter(|e| e.satisfied).count();
        Some(ok as f64 / self.entries.len() as f64)
    }

    pub fn all_satisfied(&self) -> bool {
        self.entries.iter().all(|e| e.satisfied)
    }
}

/// Separation check with explicit exploration periods: `period(k)` returns
/// `⌈A/α_k⌉` (`None` for no forced exploration), `m` and `d` are the
/// detector's pre-change window and latency at the minimum change gap.
pub fn check_separation_with_periods<F>(
    change_points: &[usize],
    period: F,
    m: f64,
    d: f64,
) -> SeparationReport
where
    F: Fn(usize) -> Option<usize>,
{
    let scaled = |k: usize, base: f64| match period(k) {
        Some(p) => p as f64 * base,
        None => f64::INFINITY,
    };
    let mut prev_start = 1;
    let entries = change_points
        .iter()
        .enumerate()
        .map(|(i, &nu)| {
            let k = i + 1;
            let spacing = nu - prev_start;
            prev_start = nu;
            let pre_window = scaled(k, m);
            let previous_latency = if k == 1 { 0.0 } else { scaled(k - 1, d) };
            SeparationEntry {
                k,
                spacing,
                pre_window,
                previous_latency,
                satisfied: previous_latency + pre_window <= spacing as f64,
            }
        })
        .collect();
    SeparationReport { entries }
}

/// Separation check on `instance` with `m(Δ̲_c, T)` and `d(Δ̲_c, T)` from the given functions.
pub fn check_separation_condition<M, L>(
    instance: &PiecewiseInstance,
    cfg: &DabConfig,
    pre_window: M,
    latency: L,
) -> SeparationReport
where
    M: Fn(f64, usize) -> f64,
    L: Fn(f64, usize) -> f64,
{
    let gaps = instance.compute_gaps();
    let Some(min_gap) = gaps.min_change_gap else {
        return SeparationReport { entries: Vec::new() };
    };
    let m = pre_window(min_gap, cfg.horizon);
    let d = latency(min_gap, cfg.horizon);
    check_separation_with_periods(instance.change_points(), |k| cfg.schedule(k).period, m, d)
}

/// Replays `record` and checks that between any two restart-free times
/// `i < j` every arm got at least `⌊(j − i) / P_k⌋` forced pulls, and that
/// forced pulls sit exactly where the schedule puts them.
pub fn verify_forced_exploration(record: &TrialRecord, cfg: &DabConfig) -> std::result::Result<(), String> {
    let horizon = record.steps.len();
    let mut bounds: Vec<(usize, usize, usize)> = Vec::new();
    let mut start = 0;
    for (idx, r) in record.restarts.iter().enumerate() {
        bounds.push((start, r.time, idx + 1));
        start = r.time;
    }
    bounds.push((start, horizon, record.restarts.len() + 1));

    for (tau, end, k) in bounds {
        let schedule = cfg.schedule(k);
        let steps = &record.steps[tau..end];
        for s in steps {
            let expected = schedule.period.and_then(|p| {
                let r = (s.t - tau - 1) % p;
                (r < cfg.num_arms).then_some(r)
            });
            match expected {
                Some(arm) if !(s.forced && s.arm == arm) => {
                    return Err(format!("t={} should force arm {arm}", s.t));
                }
                None if s.forced => return Err(format!("t={} forced off-schedule", s.t)),
                _ => {}
            }
        }
        let Some(period) = schedule.period else { continue };
        // prefix[a][x]: forced pulls of arm a in (tau, tau + x]
        let len = steps.len();
        let mut prefix = vec![vec![0usize; len + 1]; cfg.num_arms];
        for (x, s) in steps.iter().enumerate() {
            for (a, row) in prefix.iter_mut().enumerate() {
                row[x + 1] = row[x] + usize::from(s.forced && s.arm == a);
            }
        }
        for i in 0..=len {
            for j in i + 1..=len {
                let need = (j - i) / period;
                for (a, row) in prefix.iter().enumerate() {
                    if row[j] - row[i] < need {
                        return Err(format!(
                            "arm {a} has {} forced pulls in ({}, {}], needs {need}",
                            row[j] - row[i],
                            tau + i,
                            tau + j
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}
