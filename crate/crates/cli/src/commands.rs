use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dab_core::dab::{check_separation_condition, verify_forced_exploration, DabConfig, FeedMode};
use dab_core::detect::{
    measure_latency_profile, DetectorConfig, LatencyModel, LatencyRequest, StreamModel, ThresholdMode,
    Variant,
};
use dab_core::env::{ArmModel, ChangeScope, PiecewiseInstance};
use dab_core::harness::{
    aggregate_csv, classify_detections, pooled_detection, run_plan, trajectory_csv, AggregateStats, Combo,
    DetectorChoice, ExperimentPlan, PolicySettings, Scenario,
};

use crate::config::{Config, ConfigError};
use crate::CliError;

const DEFAULT_RUN_XI: &str = "0.6";
const DEFAULT_SWEEP_XI: &str = "0.3,0.4,0.5,0.6,0.7,0.8";
const THRESHOLDS: [&str; 2] = ["practical", "theoretical"];

/// Writes `name` under `dir` via a temporary file and a rename.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, dir.join(name))?;
    Ok(())
}

fn threshold_mode(i: usize) -> ThresholdMode {
    if i == 0 {
        ThresholdMode::Practical
    } else {
        ThresholdMode::Theoretical
    }
}

fn parse_threshold(key: &str, s: &str) -> Result<ThresholdMode, ConfigError> {
    THRESHOLDS
        .iter()
        .position(|t| *t == s)
        .map(threshold_mode)
        .ok_or_else(|| ConfigError::Value {
            key: key.to_string(),
            value: s.to_string(),
            message: format!("expected one of {}", THRESHOLDS.join(", ")),
        })
}

fn arm_model(cfg: &Config) -> Result<ArmModel, CliError> {
    Ok(match cfg.choice("arm_model", &["bernoulli", "gaussian"])? {
        0 => ArmModel::bernoulli(),
        _ => ArmModel::gaussian(cfg.get("arm_sigma")?),
    })
}

fn load_instance(cfg: &Config) -> Result<Option<PiecewiseInstance>, CliError> {
    let Some(path) = cfg.get_opt::<PathBuf>("instance")? else {
        return Ok(None);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| ConfigError::Invalid(format!("cannot read instance {}: {e}", path.display())))?;
    Ok(Some(text.parse()?))
}

/// Sorted, deduplicated `xi` list, falling back to `default` when unset.
fn xi_grid(cfg: &mut Config, default: &str) -> Result<Vec<f64>, CliError> {
    if !cfg.has("xi") {
        cfg.set("xi", default)?;
    }
    let mut xs: Vec<f64> = cfg.list("xi")?;
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(ConfigError::Invalid("xi values must be finite".into()).into());
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Ok(xs)
}

fn build_plan(cfg: &Config, scenarios: Vec<Scenario>, trials: usize) -> Result<ExperimentPlan, CliError> {
    let fixed = scenarios.iter().find_map(|s| match s {
        Scenario::Fixed(inst) => Some((inst.num_arms(), inst.horizon())),
        Scenario::Geometric { .. } => None,
    });
    let arms = match cfg.get_opt("arms")? {
        Some(a) => a,
        None => fixed.map(|f| f.0).ok_or(ConfigError::Missing("arms"))?,
    };
    let horizon = match cfg.get_opt("horizon")? {
        Some(t) => t,
        None => fixed.map(|f| f.1).ok_or(ConfigError::Missing("horizon"))?,
    };
    let mut plan = ExperimentPlan::new(cfg.list::<Combo>("combos")?, scenarios, arms, horizon, trials);
    plan.alpha0 = cfg.get("alpha0")?;
    plan.gamma = cfg.get("gamma")?;
    plan.threshold = threshold_mode(cfg.choice("threshold", &THRESHOLDS)?);
    plan.test_stride = cfg.get("test_stride")?;
    plan.split_stride = cfg.get("split_stride")?;
    plan.feed = match cfg.choice("feed", &["all", "forced"])? {
        0 => FeedMode::AllSamples,
        _ => FeedMode::ForcedOnly,
    };
    plan.change_scope = match cfg.choice("change_scope", &["all", "one"])? {
        0 => ChangeScope::AllArms,
        _ => ChangeScope::OneArm,
    };
    plan.arm_model = arm_model(cfg)?;
    plan.detector_sigma = cfg.get("detector_sigma")?;
    plan.policies = PolicySettings {
        ucb_sigma: cfg.get("ucb_sigma")?,
        moss_sigma: cfg.get("moss_sigma")?,
        klucb_c: cfg.get("klucb_c")?,
    };
    plan.trajectory_points = cfg.get("trajectory_points")?;
    plan.base_seed = cfg.get("seed")?;
    plan.validate()?;
    Ok(plan)
}

fn detection_csv(stats: &[AggregateStats]) -> String {
    let fmt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    let mut out = String::from("combo,mean_delay_pooled,missed_until_next_pooled,mean_delay_over_xi\n");
    for p in pooled_detection(stats) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.combo,
            fmt(p.mean_delay),
            fmt(p.missed_until_next_mean),
            fmt(p.mean_delay_over_scenarios)
        );
    }
    out
}

/// Prints a short table and turns failed trials into a runtime error.
fn report(stats: &[AggregateStats]) -> Result<(), CliError> {
    println!(
        "{:<24} {:>6} {:>8} {:>12} {:>10}",
        "combo", "xi", "trials", "mean_regret", "td/cp"
    );
    for s in stats {
        let xi = s.xi.map_or_else(|| "fixed".to_string(), |x| x.to_string());
        let frac = s
            .detection_fraction()
            .map_or_else(|| "-".to_string(), |f| format!("{f:.3}"));
        println!(
            "{:<24} {:>6} {:>8} {:>12.2} {:>10}",
            s.combo.to_string(),
            xi,
            s.completed,
            s.mean_regret,
            frac
        );
        if s.clamp_warnings > 0 {
            eprintln!(
                "warning: {} xi={xi}: exploration rate clamped to round-robin in {} intervals",
                s.combo, s.clamp_warnings
            );
        }
        for f in &s.failures {
            eprintln!("warning: {} xi={xi}: trial failed: {f}", s.combo);
        }
    }
    let failed: usize = stats.iter().map(|s| s.failures.len()).sum();
    if failed > 0 {
        return Err(CliError::Runtime(format!(
            "{failed} trials failed; affected rows are partial"
        )));
    }
    Ok(())
}

fn workers(cfg: &Config) -> Result<Option<usize>, CliError> {
    let w: Option<usize> = cfg.get_opt("workers")?;
    if w == Some(0) {
        return Err(ConfigError::Invalid("workers must be at least 1".into()).into());
    }
    Ok(w)
}

pub fn run(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    let scenario = match load_instance(&cfg)? {
        Some(inst) => Scenario::Fixed(inst),
        None => {
            let xs = xi_grid(&mut cfg, DEFAULT_RUN_XI)?;
            if xs.len() != 1 {
                return Err(
                    ConfigError::Invalid("run takes a single xi; use sweep for a grid".into()).into(),
                );
            }
            Scenario::Geometric { xi: xs[0] }
        }
    };
    let plan = build_plan(&cfg, vec![scenario], cfg.get("trials")?)?;
    let stats = run_plan(&plan, workers(&cfg)?)?;
    write_atomic(out, "config.txt", &cfg.snapshot())?;
    write_atomic(out, "aggregate.csv", &aggregate_csv(&stats))?;
    write_atomic(out, "trajectory.csv", &trajectory_csv(&stats, 0))?;
    write_atomic(out, "detection.csv", &detection_csv(&stats))?;
    report(&stats)
}

pub fn sweep(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    if cfg.has("instance") {
        return Err(ConfigError::Invalid(
            "sweep runs geometric scenarios; use run for a fixed instance".into(),
        )
        .into());
    }
    let xs = xi_grid(&mut cfg, DEFAULT_SWEEP_XI)?;
    let scenarios = xs.iter().map(|&xi| Scenario::Geometric { xi }).collect();
    let plan = build_plan(&cfg, scenarios, cfg.get("trials")?)?;
    let stats = run_plan(&plan, workers(&cfg)?)?;
    write_atomic(out, "config.txt", &cfg.snapshot())?;
    write_atomic(out, "aggregate.csv", &aggregate_csv(&stats))?;
    for (g, xi) in xs.iter().enumerate() {
        write_atomic(out, &format!("trajectory_xi{xi}.csv"), &trajectory_csv(&stats, g))?;
    }
    write_atomic(out, "detection.csv", &detection_csv(&stats))?;
    report(&stats)
}

pub fn detect_bench(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    let horizon: usize = cfg.get("bench_horizon")?;
    let trials: usize = cfg.get("trials")?;
    let default_delta = (horizon as f64).powf(-cfg.get::<f64>("gamma")?);
    for key in ["delta_f", "delta_d"] {
        if !cfg.has(key) {
            cfg.set(key, &default_delta.to_string())?;
        }
    }
    // Without pre-change samples the detector has no reference to alarm against.
    if !cfg.has("bench_pre_window") {
        cfg.set("bench_pre_window", &(horizon / 4).to_string())?;
    }
    let delta_f: f64 = cfg.get("delta_f")?;
    let delta_d: f64 = cfg.get("delta_d")?;
    let detectors: Vec<DetectorChoice> = cfg.list("bench_detectors")?;
    let thresholds = cfg
        .list::<String>("bench_thresholds")?
        .iter()
        .map(|s| parse_threshold("bench_thresholds", s))
        .collect::<Result<Vec<_>, _>>()?;
    let gaps: Vec<f64> = cfg.list("bench_gaps")?;
    if detectors.is_empty() || thresholds.is_empty() || gaps.is_empty() {
        return Err(
            ConfigError::Invalid("bench needs at least one detector, threshold and gap".into()).into(),
        );
    }
    let model = arm_model(&cfg)?;
    let stream = StreamModel {
        model,
        pre_mean: cfg.get("bench_pre_mean")?,
    };
    let detector_sigma: f64 = cfg.get("detector_sigma")?;
    let (test_stride, split_stride): (usize, usize) = (cfg.get("test_stride")?, cfg.get("split_stride")?);
    let pre_window: usize = cfg.get("bench_pre_window")?;
    let placements: usize = cfg.get("bench_placements")?;
    let seed: u64 = cfg.get("seed")?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers(&cfg)? {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;

    let mut csv =
        String::from("detector,threshold,delta_c,M,m,delta_f,delta_d,d,false_alarm_rate,mean_delay\n");
    for &choice in &detectors {
        let variant = if choice.bernoulli {
            Variant::Bernoulli
        } else {
            Variant::Gaussian {
                sigma: detector_sigma,
            }
        };
        for &threshold in &thresholds {
            let detector = DetectorConfig::new(choice.kind, variant, delta_f)
                .with_threshold(threshold)
                .with_strides(test_stride, split_stride);
            for &gap in &gaps {
                let req = LatencyRequest {
                    detector,
                    stream,
                    change_gap: gap,
                    horizon,
                    pre_window,
                    delta_d,
                    trials,
                    placements,
                    seed,
                };
                let profile = pool.install(|| measure_latency_profile(&req))?;
                for w in &profile.warnings {
                    eprintln!("warning: {} gap {gap}: {w}", choice.label());
                }
                let name = THRESHOLDS[usize::from(threshold == ThresholdMode::Theoretical)];
                let _ = writeln!(
                    csv,
                    "{},{name},{gap},{horizon},{pre_window},{delta_f},{delta_d},{},{},{}",
                    choice.label(),
                    profile.latency,
                    profile.false_alarm_rate,
                    profile.mean_delay.map_or_else(String::new, |v| v.to_string())
                );
                println!(
                    "{} {name} gap {gap}: d = {}, false alarms {:.4}",
                    choice.label(),
                    profile.latency,
                    profile.false_alarm_rate
                );
            }
        }
    }
    write_atomic(out, "config.txt", &cfg.snapshot())?;
    write_atomic(out, "detect_bench.csv", &csv)
}

pub fn check_condition(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    let xs = xi_grid(&mut cfg, DEFAULT_SWEEP_XI)?;
    let scenarios = xs.iter().map(|&xi| Scenario::Geometric { xi }).collect();
    let plan = build_plan(&cfg, scenarios, cfg.get("trials")?)?;
    let dab = DabConfig::new(plan.num_arms, plan.horizon, plan.alpha0, plan.gamma);
    let delta = dab.delta();
    let model = LatencyModel {
        c_d: cfg.get("c_d")?,
        c_m: cfg.get("c_m")?,
        sigma: plan.detector_sigma,
        delta_f: delta,
        delta_d: delta,
    };
    let mut rows = String::from("xi,trial,k,spacing,pre_window,previous_latency,satisfied\n");
    let mut summary = String::from("xi,instances,change_points,satisfied_fraction,instances_all_satisfied\n");
    for (g, xi) in xs.iter().enumerate() {
        let (mut cps, mut ok, mut all_ok) = (0usize, 0usize, 0usize);
        for trial in 0..plan.trials {
            let inst = plan.instance(g, trial)?;
            let report = check_separation_condition(
                &inst,
                &dab,
                |gap, t| model.pre_window(gap, t),
                |gap, t| model.latency(gap, t),
            );
            for e in &report.entries {
                let _ = writeln!(
                    rows,
                    "{xi},{trial},{},{},{},{},{}",
                    e.k, e.spacing, e.pre_window, e.previous_latency, e.satisfied
                );
            }
            cps += report.entries.len();
            ok += report.entries.iter().filter(|e| e.satisfied).count();
            all_ok += usize::from(report.all_satisfied());
        }
        let frac = if cps > 0 {
            (ok as f64 / cps as f64).to_string()
        } else {
            String::new()
        };
        let _ = writeln!(summary, "{xi},{},{cps},{frac},{all_ok}", plan.trials);
        println!(
            "xi {xi}: {ok}/{cps} change-points separated, {all_ok}/{} instances fully",
            plan.trials
        );
    }
    write_atomic(out, "config.txt", &cfg.snapshot())?;
    write_atomic(out, "separation.csv", &rows)?;
    write_atomic(out, "separation_summary.csv", &summary)
}

pub fn replay(cfg: &Config, out: &Path) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    let trial: usize = cfg.get("replay_trial")?;
    let scenario = match load_instance(&cfg)? {
        Some(inst) => Scenario::Fixed(inst),
        None => {
            let xi = match cfg.get_opt::<f64>("replay_xi")? {
                Some(x) => x,
                None => xi_grid(&mut cfg, DEFAULT_RUN_XI)?[0],
            };
            cfg.set("replay_xi", &xi.to_string())?;
            Scenario::Geometric { xi }
        }
    };
    let combo: Combo = match cfg.get_opt("replay_combo")? {
        Some(c) => c,
        None => *cfg
            .list::<Combo>("combos")?
            .first()
            .ok_or_else(|| ConfigError::Invalid("no combo to replay".into()))?,
    };
    cfg.set("replay_combo", &combo.to_string())?;
    let mut plan = build_plan(&cfg, vec![scenario], trial + 1)?;
    plan.combos = vec![combo];
    plan.validate()?;
    let (instance, record) = plan.run_trial(&combo, 0, trial)?;

    let alpha0 = if combo.detector.is_some() {
        plan.alpha0
    } else {
        0.0
    };
    let dab = DabConfig {
        feed: plan.feed,
        ..DabConfig::new(plan.num_arms, plan.horizon, alpha0, plan.gamma)
    };
    verify_forced_exploration(&record, &dab)
        .map_err(|e| CliError::Runtime(format!("forced exploration: {e}")))?;

    let csv = record.to_csv();
    let check = cfg.get_opt::<PathBuf>("replay_check")?;
    write_atomic(out, "config.txt", &cfg.snapshot())?;
    write_atomic(out, "trial.csv", &csv)?;
    write_atomic(out, "instance.txt", &instance.to_string())?;

    let m = classify_detections(&record.restart_times(), instance.change_points());
    println!(
        "{combo} trial {trial}: regret {:.2}, {} change-points, {} restarts ({} true, {} false)",
        record.final_regret,
        instance.num_changes(),
        m.detections,
        m.true_detections,
        m.false_alarms
    );
    if let Some(path) = check {
        let stored = fs::read_to_string(&path)?;
        if stored != csv {
            return Err(CliError::Runtime(format!(
                "replayed trajectory differs from {}",
                path.display()
            )));
        }
        println!("matches {}", path.display());
    }
    Ok(())
}
