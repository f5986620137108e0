mod common;

use proptest::prelude::*;
use rand::Rng;

use dab_core::bandit::{BanditPolicy, IndexPolicy, PolicyKind};
use dab_core::dab::{run_episode, verify_forced_exploration, Dab, DabConfig, FeedMode};
use dab_core::detect::{glr_statistic, gsr_statistic, Detector, Variant};
use dab_core::env::{generate_geometric_instance, ChangeScope, GeometricEnvConfig, PiecewiseInstance};
use dab_core::harness::{classify_detections, regret_trajectory, trajectory_grid};
use dab_core::seed::rng_for;

/// Alarms whenever its history reaches `length` samples.
#[derive(Debug, Clone)]
struct AlarmAt {
    length: usize,
    samples: usize,
}

impl Detector for AlarmAt {
    fn push_and_test(&mut self, _sample: f64) -> bool {
        self.samples += 1;
        self.samples >= self.length
    }

    fn reset(&mut self) {
        self.samples = 0;
    }

    fn samples(&self) -> usize {
        self.samples
    }
}

fn policy_kind() -> impl Strategy<Value = PolicyKind> {
    prop_oneof![
        Just(PolicyKind::Ucb { sigma: 1.0 }),
        Just(PolicyKind::KlUcb { c: 3.0 }),
        Just(PolicyKind::Moss {
            sigma: 1.0,
            horizon: 3000
        }),
    ]
}

fn sorted_times(max: usize, len: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::btree_set(1..=max, 0..len).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_are_valid_and_round_trip(
        arms in 2usize..7,
        horizon in 50usize..5000,
        xi in 0.2f64..0.9,
        one_arm in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut cfg = GeometricEnvConfig::benchmark(arms, horizon, xi);
        if one_arm {
            cfg.scope = ChangeScope::OneArm;
        }
        let inst = generate_geometric_instance(&cfg, &mut rng_for(seed, &[])).unwrap();
        prop_assert_eq!(inst.means().len(), inst.change_points().len() + 1);
        prop_assert!(inst.change_points().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(inst.change_points().iter().all(|&c| c >= 2 && c <= horizon));
        prop_assert!(inst.means().iter().flatten().all(|m| (0.0..=1.0).contains(m)));
        for w in inst.means().windows(2) {
            let moved: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).filter(|d| *d > 0.0).collect();
            prop_assert!(!moved.is_empty());
            prop_assert!(moved.iter().all(|&d| d <= 0.4 + 1e-12));
            if one_arm {
                prop_assert_eq!(moved.len(), 1);
            }
        }
        let gaps = inst.compute_gaps();
        prop_assert!(gaps.subopt_gaps.iter().flatten().all(|&g| g >= 0.0));
        if let Some(min) = gaps.min_change_gap {
            prop_assert!(min > 0.0);
        }
        let back: PiecewiseInstance = inst.to_string().parse().unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn detection_metrics_are_consistent(
        restarts in sorted_times(2000, 30),
        cps in sorted_times(2000, 30),
    ) {
        let cps: Vec<usize> = cps.into_iter().filter(|&c| c >= 2).collect();
        let m = classify_detections(&restarts, &cps);
        prop_assert_eq!(m.true_detections + m.false_alarms, m.detections);
        prop_assert_eq!(m.detections, restarts.len());
        prop_assert!(m.true_detections <= m.detections);
        prop_assert_eq!(m.delays.len(), m.true_detections);
        prop_assert!(m.missed_counts.iter().sum::<usize>() <= cps.len());
        let mut prev = 0;
        let mut delays = m.delays.iter();
        for &t in &restarts {
            if cps.iter().any(|&c| c > prev && c <= t) {
                let d = *delays.next().unwrap();
                prop_assert!(d <= t - prev);
            }
            prev = t;
        }
    }

    #[test]
    fn composer_keeps_policy_and_detectors_in_step(
        arms in 2usize..6,
        kind in policy_kind(),
        alpha0 in prop_oneof![Just(0.0), 0.02f64..0.5],
        length in 5usize..400,
        forced_only in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let horizon = 3000;
        let mut cfg = DabConfig::new(arms, horizon, alpha0, 0.5);
        if forced_only {
            cfg.feed = FeedMode::ForcedOnly;
        }
        let policy = IndexPolicy::new(kind, arms).unwrap();
        let mut dab = Dab::new(cfg, policy, AlarmAt { length, samples: 0 }).unwrap();
        let mut rng = rng_for(seed, &[]);
        let (mut since, mut free, mut forced_since) = (0usize, 0u64, 0usize);
        for _ in 0..horizon {
            let out = dab.step(|_, _| f64::from(u8::from(rng.random_bool(0.5)))).unwrap();
            if out.restarted {
                prop_assert_eq!(dab.last_restart(), dab.time());
                prop_assert!(dab.detectors().iter().all(|d| d.samples() == 0));
                prop_assert_eq!(dab.policy().steps(), 0);
                prop_assert!(dab.policy().counts().iter().all(|&n| n == 0));
                prop_assert_eq!(dab.interval(), dab.restarts().len() + 1);
                (since, free, forced_since) = (0, 0, 0);
                continue;
            }
            since += 1;
            if out.forced {
                forced_since += 1;
            } else {
                free += 1;
            }
            prop_assert_eq!(dab.policy().steps(), free);
            prop_assert_eq!(dab.policy().counts().iter().sum::<u64>(), free);
            let fed: usize = dab.detectors().iter().map(Detector::samples).sum();
            prop_assert_eq!(fed, if forced_only { forced_since } else { since });
            if let Some(p) = dab.schedule().period {
                prop_assert!(p >= arms);
            }
        }
    }

    #[test]
    fn recorded_trajectories_satisfy_the_forced_counting_bound(
        arms in 2usize..6,
        xi in 0.4f64..0.9,
        alpha0 in 0.02f64..0.6,
        length in 50usize..600,
        seed in any::<u64>(),
    ) {
        let horizon = 4000;
        let inst = generate_geometric_instance(
            &GeometricEnvConfig::benchmark(arms, horizon, xi),
            &mut rng_for(seed, &[0]),
        ).unwrap();
        let cfg = DabConfig::new(arms, horizon, alpha0, 0.5);
        let policy = IndexPolicy::new(PolicyKind::KlUcb { c: 3.0 }, arms).unwrap();
        let dab = Dab::new(cfg, policy, AlarmAt { length, samples: 0 }).unwrap();
        let rec = run_episode(dab, &inst, &mut rng_for(seed, &[1])).unwrap();
        prop_assert_eq!(verify_forced_exploration(&rec, &cfg), Ok(()));
        let grid = trajectory_grid(horizon, 50);
        let traj = regret_trajectory(std::slice::from_ref(&rec), &grid);
        prop_assert!(traj.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(rec.steps.windows(2).all(|w| w[0].cumulative_regret <= w[1].cumulative_regret));
    }

    #[test]
    fn gsr_is_sandwiched_by_glr(seed in any::<u64>(), gaussian in any::<bool>()) {
        let variant = if gaussian { Variant::Gaussian { sigma: 0.5 } } else { Variant::Bernoulli };
        let xs = common::random_sequence(&mut rng_for(seed, &[]), variant, 200);
        let p = common::prefix_sums(&xs);
        let n = xs.len();
        let g = glr_statistic(&p, n, variant, 1);
        let w = gsr_statistic(&p, n, variant);
        prop_assert!(g >= 0.0);
        prop_assert!(w <= g + 1e-9);
        prop_assert!(w >= g - (n as f64).ln() - 1e-9);
    }
}
