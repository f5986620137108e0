//! Monte Carlo experiment engine.
//!
//! A plan is a cross product of algorithm combos and scenarios (a geometric
//! change rate `ξ` or a fixed instance), each run for `trials` independent
//! trials. Trials run in parallel; results are collected in job order and
//! reduced on one thread, so aggregates are bit-identical for any worker
//! count.
//!
//! Seeds: the environment of trial `i` in scenario `g` comes from
//! `[ENV_STREAM, key(g), i]` and is shared by every combo; play randomness comes
//! from `[PLAY_STREAM, name_id(combo), key(g), i]`. `key(g)` is the bit pattern
//! of `ξ` for geometric scenarios and the scenario index for fixed ones.

use std::fmt::{self, Write as _};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use rayon::prelude::*;

use crate::bandit::{IndexPolicy, PolicyKind};
use crate::dab::{run_episode, Dab, DabConfig, FeedMode, Restart, TrialRecord};
use crate::detect::{
    AnyDetector, DetectorConfig, NeverAlarm, StatisticKind, StreamDetector, ThresholdMode, Variant,
};
use crate::env::{generate_geometric_instance, ArmModel, ChangeScope, GeometricEnvConfig, PiecewiseInstance};
use crate::error::{Error, Result};
use crate::seed::{name_id, rng_for, ENV_STREAM, PLAY_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyChoice {
    Ucb,
    KlUcb,
    Moss,
}

impl PolicyChoice {
    pub fn label(self) -> &'static str {
        match self {
            PolicyChoice::Ucb => "UCB",
            PolicyChoice::KlUcb => "klUCB",
            PolicyChoice::Moss => "MOSS",
        }
    }
}

impl FromStr for PolicyChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "UCB" => Ok(PolicyChoice::Ucb),
            "klUCB" => Ok(PolicyChoice::KlUcb),
            "MOSS" => Ok(PolicyChoice::Moss),
            _ => Err(Error::Config(format!("unknown policy `{s}` (UCB, klUCB, MOSS)"))),
        }
    }
}

/// Detector family of a combo: likelihood variant and statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectorChoice {
    pub bernoulli: bool,
    pub kind: StatisticKind,
}

impl DetectorChoice {
    pub fn label(self) -> String {
        let v = if self.bernoulli { "B" } else { "G" };
        let k = match self.kind {
            StatisticKind::Glr => "GLR",
            StatisticKind::Gsr => "GSR",
        };
        format!("{v}-{k}")
    }
}

impl FromStr for DetectorChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (v, k) = s
            .split_once('-')
            .ok_or_else(|| Error::Config(format!("unknown detector `{s}`")))?;
        let bernoulli = match v {
            "B" => true,
            "G" => false,
            _ => return Err(Error::Config(format!("unknown detector `{s}`"))),
        };
        let kind = match k {
            "GLR" => StatisticKind::Glr,
            "GSR" => StatisticKind::Gsr,
            _ => return Err(Error::Config(format!("unknown detector `{s}`"))),
        };
        Ok(Self { bernoulli, kind })
    }
}

/// An algorithm: a stationary policy, optionally wrapped by DAB with a detector.
///
/// Written as `DAB:B-GLR+klUCB` or, for stationary baselines, `klUCB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Combo {
    pub policy: PolicyChoice,
    pub detector: Option<DetectorChoice>,
}

impl Combo {
    pub fn dab(detector: &str, policy: PolicyChoice) -> Result<Self> {
        Ok(Self {
            policy,
            detector: Some(detector.parse()?),
        })
    }

    pub fn stationary(policy: PolicyChoice) -> Self {
        Self {
            policy,
            detector: None,
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Detector label, or `none` for stationary baselines.
    pub fn detector_label(&self) -> String {
        self.detector
            .map_or_else(|| "none".to_string(), DetectorChoice::label)
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.detector {
            Some(d) => write!(f, "DAB:{}+{}", d.label(), self.policy.label()),
            None => f.write_str(self.policy.label()),
        }
    }
}

impl FromStr for Combo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.strip_prefix("DAB:") {
            Some(rest) => {
                let (det, pol) = rest
                    .split_once('+')
                    .ok_or_else(|| Error::Config(format!("combo `{s}` lacks `+policy`")))?;
                Ok(Self {
                    policy: pol.parse()?,
                    detector: Some(det.parse()?),
                })
            }
            None => Ok(Self::stationary(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// Fresh geometric instance per trial with change probability `T^{-ξ}`.
    Geometric { xi: f64 },
    /// The same instance in every trial.
    Fixed(PiecewiseInstance),
}

impl Scenario {
    pub fn xi(&self) -> Option<f64> {
        match self {
            Scenario::Geometric { xi } => Some(*xi),
            Scenario::Fixed(_) => None,
        }
    }

    fn key(&self, index: usize) -> u64 {
        match self {
            Scenario::Geometric { xi } => xi.to_bits(),
            Scenario::Fixed(_) => index as u64,
        }
    }
}

/// Policy hyper-parameters shared by every combo in a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySettings {
    pub ucb_sigma: f64,
    pub moss_sigma: f64,
    pub klucb_c: f64,
}

impl Default for PolicySettings {
    fn default() -> Self {
        Self {
            ucb_sigma: 1.0,
            moss_sigma: 1.0,
            klucb_c: 3.0,
        }
    }
}

impl PolicySettings {
    pub fn kind(&self, choice: PolicyChoice, horizon: usize) -> PolicyKind {
        match choice {
            PolicyChoice::Ucb => PolicyKind::Ucb {
                sigma: self.ucb_sigma,
            },
            PolicyChoice::KlUcb => PolicyKind::KlUcb { c: self.klucb_c },
            PolicyChoice::Moss => PolicyKind::Moss {
                sigma: self.moss_sigma,
                horizon,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub combos: Vec<Combo>,
    pub scenarios: Vec<Scenario>,
    pub num_arms: usize,
    pub horizon: usize,
    pub trials: usize,
    pub alpha0: f64,
    pub gamma: f64,
    pub threshold: ThresholdMode,
    pub test_stride: usize,
    pub split_stride: usize,
    pub feed: FeedMode,
    pub policies: PolicySettings,
    pub arm_model: ArmModel,
    pub change_scope: ChangeScope,
    /// `σ` of the Gaussian detector variant.
    pub detector_sigma: f64,
    pub base_seed: u64,
    /// Number of points of the regret trajectory grid (always ends at `T`).
    pub trajectory_points: usize,
}

impl ExperimentPlan {
    /// Benchmark defaults: Bernoulli arms, `α₀ = 0.05`, `γ = 1/2`, practical
    /// threshold, strides 10/5.
    pub fn new(
        combos: Vec<Combo>,
        scenarios: Vec<Scenario>,
        num_arms: usize,
        horizon: usize,
        trials: usize,
    ) -> Self {
        Self {
            combos,
            scenarios,
            num_arms,
            horizon,
            trials,
            alpha0: 0.05,
            gamma: 0.5,
            threshold: ThresholdMode::Practical,
            test_stride: 10,
            split_stride: 5,
            feed: FeedMode::AllSamples,
            policies: PolicySettings::default(),
            arm_model: ArmModel::bernoulli(),
            change_scope: ChangeScope::AllArms,
            detector_sigma: 0.5,
            base_seed: 0,
            trajectory_points: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.combos.is_empty() {
            return Err(Error::Config("plan has no combos".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("plan has no scenarios".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.trajectory_points == 0 {
            return Err(Error::Config("trajectory needs at least one point".into()));
        }
        self.dab_config(true).validate()?;
        for combo in &self.combos {
            if let Some(d) = combo.detector {
                self.detector_config(d).validate()?;
            }
            IndexPolicy::new(self.policies.kind(combo.policy, self.horizon), self.num_arms)?;
        }
        for scenario in &self.scenarios {
            match scenario {
                Scenario::Geometric { xi } => self.env_config(*xi).validate()?,
                Scenario::Fixed(inst) => {
                    if inst.num_arms() != self.num_arms || inst.horizon() != self.horizon {
                        return Err(Error::Config(format!(
                            "fixed instance is {} arms x {} steps, plan is {} x {}",
                            inst.num_arms(),
                            inst.horizon(),
                            self.num_arms,
                            self.horizon
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `δ_F = δ_D = T^{-γ}`.
    pub fn delta(&self) -> f64 {
        self.dab_config(true).delta()
    }

    pub fn detector_config(&self, choice: DetectorChoice) -> DetectorConfig {
        let variant = if choice.bernoulli {
            Variant::Bernoulli
        } else {
            Variant::Gaussian {
                sigma: self.detector_sigma,
            }
        };
        DetectorConfig::new(choice.kind, variant, self.delta())
            .with_threshold(self.threshold)
            .with_strides(self.test_stride, self.split_stride)
    }

    /// Stationary baselines never force-explore.
    fn dab_config(&self, detecting: bool) -> DabConfig {
        let alpha0 = if detecting { self.alpha0 } else { 0.0 };
        DabConfig {
            feed: self.feed,
            ..DabConfig::new(self.num_arms, self.horizon, alpha0, self.gamma)
        }
    }

    fn env_config(&self, xi: f64) -> GeometricEnvConfig {
        GeometricEnvConfig {
            arm_model: self.arm_model,
            scope: self.change_scope,
            ..GeometricEnvConfig::benchmark(self.num_arms, self.horizon, xi)
        }
    }

    /// Instance used by trial `trial` of scenario `index`.
    pub fn instance(&self, index: usize, trial: usize) -> Result<PiecewiseInstance> {
        let scenario = &self.scenarios[index];
        match scenario {
            Scenario::Geometric { xi } => {
                let mut rng = rng_for(self.base_seed, &[ENV_STREAM, scenario.key(index), trial as u64]);
                generate_geometric_instance(&self.env_config(*xi), &mut rng)
            }
            Scenario::Fixed(inst) => Ok(inst.clone()),
        }
    }

    /// Runs one trial and returns its full record together with the instance.
    pub fn run_trial(
        &self,
        combo: &Combo,
        index: usize,
        trial: usize,
    ) -> Result<(PiecewiseInstance, TrialRecord)> {
        let instance = self.instance(index, trial)?;
        let policy = IndexPolicy::new(self.policies.kind(combo.policy, self.horizon), self.num_arms)?;
        let detector = match combo.detector {
            Some(d) => AnyDetector::Stream(StreamDetector::new(self.detector_config(d))?),
            None => AnyDetector::Never(NeverAlarm::default()),
        };
        let dab = Dab::new(self.dab_config(combo.detector.is_some()), policy, detector)?;
        let key = self.scenarios[index].key(index);
        let mut rng = rng_for(
            self.base_seed,
            &[PLAY_STREAM, name_id(&combo.name()), key, trial as u64],
        );
        let record = run_episode(dab, &instance, &mut rng)?;
        Ok((instance, record))
    }
}

/// Evenly spaced grid of `points` times in `[1, T]` ending at `T`.
pub fn trajectory_grid(horizon: usize, points: usize) -> Vec<usize> {
    let points = points.clamp(1, horizon.max(1));
    let mut grid: Vec<usize> = (1..=points).map(|i| (i * horizon).div_ceil(points)).collect();
    grid.dedup();
    grid
}

/// `Σ_t (max_a μ_{a,k(t)} − μ_{a_t,k(t)})` over a pull sequence of length `T`.
pub fn dynamic_regret(pulls: &[usize], instance: &PiecewiseInstance) -> Result<f64> {
    if pulls.len() != instance.horizon() {
        return Err(Error::InvalidArgument(format!(
            "{} pulls for horizon {}",
            pulls.len(),
            instance.horizon()
        )));
    }
    let mut total = 0.0;
    for (i, &arm) in pulls.iter().enumerate() {
        if arm >= instance.num_arms() {
            return Err(Error::InvalidArgument(format!("arm {arm} out of range")));
        }
        let t = i + 1;
        total += instance.oracle_best_mean(t) - instance.mean(arm, t);
    }
    Ok(total)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DetectionMetrics {
    pub change_points: usize,
    pub detections: usize,
    pub true_detections: usize,
    pub false_alarms: usize,
    /// Delay of each true detection.
    pub delays: Vec<usize>,
    /// Change-points covered by each true detection.
    pub missed_counts: Vec<usize>,
}

impl DetectionMetrics {
    pub fn mean_delay(&self) -> Option<f64> {
        mean_usize(&self.delays)
    }

    pub fn mean_missed(&self) -> Option<f64> {
        mean_usize(&self.missed_counts)
    }
}

fn mean_usize(xs: &[usize]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<usize>() as f64 / xs.len() as f64)
}

/// Classifies restarts against the true change-points.
///
/// A restart at `t` is a true detection when some change-point lies in
/// `(t_prev, t]`, `t_prev` being the previous restart (0 for the first). Its
/// delay is `t` minus the latest change-point `≤ t` and its missed count is the
/// number of change-points in `(t_prev, t]`.
pub fn classify_detections(restarts: &[usize], change_points: &[usize]) -> DetectionMetrics {
    let mut m = DetectionMetrics {
        change_points: change_points.len(),
        ..Default::default()
    };
    let mut prev = 0;
    for &t in restarts {
        let lo = change_points.partition_point(|&c| c <= prev);
        let hi = change_points.partition_point(|&c| c <= t);
        m.detections += 1;
        if hi > lo {
            m.true_detections += 1;
            m.delays.push(t - change_points[hi - 1]);
            m.missed_counts.push(hi - lo);
        } else {
            m.false_alarms += 1;
        }
        prev = t;
    }
    m
}

/// Pointwise mean cumulative regret of `records` at `grid` times.
pub fn regret_trajectory(records: &[TrialRecord], grid: &[usize]) -> Vec<f64> {
    let curves: Vec<Vec<f64>> = records
        .iter()
        .map(|r| grid.iter().map(|&t| r.cumulative_at(t)).collect())
        .collect();
    mean_curve(&curves, grid.len())
}

fn mean_curve(curves: &[Vec<f64>], len: usize) -> Vec<f64> {
    let mut acc = vec![0.0; len];
    for c in curves {
        for (a, v) in acc.iter_mut().zip(c) {
            *a += v;
        }
    }
    if !curves.is_empty() {
        let n = curves.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
    }
    acc
}

/// What survives of one trial after aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub final_regret: f64,
    pub metrics: DetectionMetrics,
    pub restarts: Vec<Restart>,
    /// Cumulative regret at the plan's trajectory grid.
    pub trajectory: Vec<f64>,
    pub clamp_warnings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub combo: Combo,
    pub scenario: usize,
    pub xi: Option<f64>,
    pub horizon: usize,
    /// Trials requested.
    pub trials: usize,
    /// Trials that completed; the remaining ones are listed in `failures`.
    pub completed: usize,
    pub mean_regret: f64,
    /// Population standard deviation of the final regret.
    pub std_regret: f64,
    pub cp_mean: f64,
    pub detections_mean: f64,
    pub true_det_mean: f64,
    pub false_alarm_mean: f64,
    /// Pooled over all true detections of all trials.
    pub mean_delay: Option<f64>,
    /// Pooled over all true detections of all trials.
    pub missed_until_next_mean: Option<f64>,
    pub grid: Vec<usize>,
    pub trajectory: Vec<f64>,
    pub failures: Vec<String>,
    pub clamp_warnings: usize,
    pub summaries: Vec<TrialSummary>,
}

impl AggregateStats {
    pub fn partial(&self) -> bool {
        self.completed < self.trials
    }

    /// Fraction of change-points that were truly detected.
    pub fn detection_fraction(&self) -> Option<f64> {
        (self.cp_mean > 0.0).then(|| self.true_det_mean / self.cp_mean)
    }

    fn from_summaries(
        combo: Combo,
        scenario: usize,
        xi: Option<f64>,
        plan: &ExperimentPlan,
        grid: &[usize],
        outcomes: Vec<std::result::Result<TrialSummary, String>>,
    ) -> Self {
        let mut summaries = Vec::with_capacity(outcomes.len());
        let mut failures = Vec::new();
        for (i, o) in outcomes.into_iter().enumerate() {
            match o {
                Ok(s) => summaries.push(s),
                Err(e) => failures.push(format!("trial {i}: {e}")),
            }
        }
        let n = summaries.len();
        let nf = n.max(1) as f64;
        let mean = |f: &dyn Fn(&TrialSummary) -> f64| summaries.iter().map(f).sum::<f64>() / nf;
        let mean_regret = mean(&|s| s.final_regret);
        let var = mean(&|s| (s.final_regret - mean_regret).powi(2));
        let delays: Vec<usize> = summaries
            .iter()
            .flat_map(|s| s.metrics.delays.iter().copied())
            .collect();
        let missed: Vec<usize> = summaries
            .iter()
            .flat_map(|s| s.metrics.missed_counts.iter().copied())
            .collect();
        let curves: Vec<Vec<f64>> = summaries.iter().map(|s| s.trajectory.clone()).collect();
        Self {
            combo,
            scenario,
            xi,
            horizon: plan.horizon,
            trials: plan.trials,
            completed: n,
            mean_regret,
            std_regret: var.sqrt(),
            cp_mean: mean(&|s| s.metrics.change_points as f64),
            detections_mean: mean(&|s| s.metrics.detections as f64),
            true_det_mean: mean(&|s| s.metrics.true_detections as f64),
            false_alarm_mean: mean(&|s| s.metrics.false_alarms as f64),
            mean_delay: mean_usize(&delays),
            missed_until_next_mean: mean_usize(&missed),
            grid: grid.to_vec(),
            trajectory: mean_curve(&curves, grid.len()),
            failures,
            clamp_warnings: summaries.iter().map(|s| s.clamp_warnings).sum(),
            summaries,
        }
    }
}

fn summarize(
    plan: &ExperimentPlan,
    combo: &Combo,
    scenario: usize,
    trial: usize,
    grid: &[usize],
) -> Result<TrialSummary> {
    let (instance, record) = plan.run_trial(combo, scenario, trial)?;
    let times = record.restart_times();
    Ok(TrialSummary {
        final_regret: record.final_regret,
        metrics: classify_detections(&times, instance.change_points()),
        trajectory: grid.iter().map(|&t| record.cumulative_at(t)).collect(),
        restarts: record.restarts,
        clamp_warnings: record.clamp_warnings,
    })
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "trial panicked".to_string())
}

/// Runs every (combo, scenario, trial) job on `workers` threads (`None`: all
/// cores) and aggregates per (combo, scenario), ordered by combo then scenario.
///
/// A trial that fails or panics is recorded in `failures` and the row is
/// flagged partial; the other trials still count.
pub fn run_plan(plan: &ExperimentPlan, workers: Option<usize>) -> Result<Vec<AggregateStats>> {
    plan.validate()?;
    let grid = trajectory_grid(plan.horizon, plan.trajectory_points);
    let jobs: Vec<(usize, usize, usize)> = (0..plan.combos.len())
        .flat_map(|c| (0..plan.scenarios.len()).flat_map(move |g| (0..plan.trials).map(move |i| (c, g, i))))
        .collect();

    let run = || -> Vec<std::result::Result<TrialSummary, String>> {
        jobs.par_iter()
            .map(|&(c, g, i)| {
                catch_unwind(AssertUnwindSafe(|| summarize(plan, &plan.combos[c], g, i, &grid)))
                    .map_err(panic_message)
                    .and_then(|r| r.map_err(|e| e.to_string()))
            })
            .collect()
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut outcomes = pool.install(run).into_iter();

    let mut stats = Vec::with_capacity(plan.combos.len() * plan.scenarios.len());
    for combo in &plan.combos {
        for (g, scenario) in plan.scenarios.iter().enumerate() {
            let chunk: Vec<_> = outcomes.by_ref().take(plan.trials).collect();
            stats.push(AggregateStats::from_summaries(
                *combo,
                g,
                scenario.xi(),
                plan,
                &grid,
                chunk,
            ));
        }
    }
    Ok(stats)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub const AGGREGATE_HEADER: &str = "combo,detector,policy,xi,T,trials,mean_regret,std_regret,cp_mean,detections_mean,true_det_mean,false_alarm_mean,mean_delay,missed_until_next_mean";

/// Aggregate CSV; `trials` is the number of completed trials.
pub fn aggregate_csv(stats: &[AggregateStats]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for s in stats {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.combo,
            s.combo.detector_label(),
            s.combo.policy.label(),
            fmt_opt(s.xi),
            s.horizon,
            s.completed,
            s.mean_regret,
            s.std_regret,
            s.cp_mean,
            s.detections_mean,
            s.true_det_mean,
            s.false_alarm_mean,
            fmt_opt(s.mean_delay),
            fmt_opt(s.missed_until_next_mean)
        );
    }
    out
}

/// Trajectory CSV of the rows belonging to `scenario`.
pub fn trajectory_csv(stats: &[AggregateStats], scenario: usize) -> String {
    let mut out = String::from("combo,t,mean_cum_regret\n");
    for s in stats.iter().filter(|s| s.scenario == scenario) {
        for (t, v) in s.grid.iter().zip(&s.trajectory) {
            let _ = writeln!(out, "{},{},{}", s.combo, t, v);
        }
    }
    out
}

/// Per-combo detection summary pooled over every scenario of the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledDetection {
    pub combo: Combo,
    pub mean_delay: Option<f64>,
    pub missed_until_next_mean: Option<f64>,
    /// Mean over scenarios of the per-scenario mean delay.
    pub mean_delay_over_scenarios: Option<f64>,
}

pub fn pooled_detection(stats: &[AggregateStats]) -> Vec<PooledDetection> {
    let mut combos: Vec<Combo> = Vec::new();
    for s in stats {
        if !combos.contains(&s.combo) {
            combos.push(s.combo);
        }
    }
    combos
        .into_iter()
        .map(|combo| {
            let rows: Vec<&AggregateStats> = stats.iter().filter(|s| s.combo == combo).collect();
            let pool = |f: fn(&DetectionMetrics) -> &Vec<usize>| -> Vec<usize> {
                rows.iter()
                    .flat_map(|r| r.summaries.iter().flat_map(|s| f(&s.metrics).iter().copied()))
                    .collect()
            };
            let per: Vec<f64> = rows.iter().filter_map(|r| r.mean_delay).collect();
            PooledDetection {
                combo,
                mean_delay: mean_usize(&pool(|m| &m.delays)),
                missed_until_next_mean: mean_usize(&pool(|m| &m.missed_counts)),
                mean_delay_over_scenarios: (!per.is_empty())
                    .then(|| per.iter().sum::<f64>() / per.len() as f64),
            }
        })
        .collect()
}
