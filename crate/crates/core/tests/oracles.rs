mod common;

use approx::assert_abs_diff_eq;
use rand::Rng;

use dab_core::bandit::{klucb_index, IndexPolicy, PolicyKind};
use dab_core::dab::{run_episode, Dab, DabConfig};
use dab_core::detect::{glr_statistic, gsr_statistic, split_llr, NeverAlarm, Variant};
use dab_core::env::{generate_geometric_instance, ArmModel, GeometricEnvConfig, PiecewiseInstance};
use dab_core::harness::dynamic_regret;
use dab_core::kl::kl_bernoulli;
use dab_core::seed::rng_for;

const VARIANTS: [Variant; 2] = [Variant::Bernoulli, Variant::Gaussian { sigma: 0.7 }];

#[test]
fn split_statistics_match_numerical_likelihood_maximization() {
    let mut rng = rng_for(1, &[]);
    for i in 0..200 {
        let v = VARIANTS[i % 2];
        let xs = common::random_sequence(&mut rng, v, 25);
        let p = common::prefix_sums(&xs);
        let n = xs.len();
        for s in 1..=n {
            assert_abs_diff_eq!(
                split_llr(&p, n, s, v),
                common::brute_split_llr(&xs, s, v),
                epsilon = 1e-9
            );
        }
        assert_abs_diff_eq!(gsr_statistic(&p, n, v), common::brute_gsr(&xs, v), epsilon = 1e-9);
    }
}

#[test]
fn strided_glr_maximizes_over_split_multiples() {
    let mut rng = rng_for(2, &[]);
    for i in 0..200 {
        let v = VARIANTS[i % 2];
        let xs = common::random_sequence(&mut rng, v, 40);
        let p = common::prefix_sums(&xs);
        let n = xs.len();
        let stride = 1 + i % 4;
        let brute = (stride..n)
            .step_by(stride)
            .map(|s| common::brute_split_llr(&xs, s, v))
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(glr_statistic(&p, n, v, stride), brute, epsilon = 1e-9);
        assert!(glr_statistic(&p, n, v, stride) <= glr_statistic(&p, n, v, 1) + 1e-12);
    }
}

#[test]
fn klucb_index_solves_the_confidence_equation() {
    let mut rng = rng_for(3, &[]);
    for _ in 0..2000 {
        let mean: f64 = rng.random();
        let pulls = rng.random_range(1..500u64);
        let step = rng.random_range(pulls..5000);
        let q = klucb_index(mean, pulls, step, 3.0);
        let lnt = (step as f64).ln();
        let budget = lnt + 3.0 * lnt.ln().max(0.0);
        assert!(q >= mean && q <= 1.0);
        if q < 1.0 - 1e-9 {
            assert_abs_diff_eq!(pulls as f64 * kl_bernoulli(mean, q), budget, epsilon = 1e-8);
        } else {
            assert!(pulls as f64 * kl_bernoulli(mean, 1.0 - 1e-9) <= budget + 1e-8);
        }
    }
}

#[test]
fn klucb_index_is_the_float_nearest_the_root() {
    let mut rng = rng_for(33, &[]);
    for _ in 0..200_000 {
        let mean: f64 = rng.random();
        let pulls = rng.random_range(1..500u64);
        let step = rng.random_range(pulls..5000);
        let q = klucb_index(mean, pulls, step, 3.0);
        let lnt = (step as f64).ln();
        let budget = lnt + 3.0 * lnt.ln().max(0.0);
        let n = pulls as f64;
        let p = mean.clamp(1e-9, 1.0 - 1e-9);
        let residual = |x: f64| (n * kl_bernoulli(p, x) - budget).abs();
        if q < 1.0 {
            let up = f64::from_bits(q.to_bits() + 1);
            let down = f64::from_bits(q.to_bits() - 1);
            assert!(
                residual(q) <= residual(up) + 1e-12 && residual(q) <= residual(down) + 1e-12,
                "{mean} {pulls} {step} {q} {} {} {}",
                residual(down),
                residual(q),
                residual(up)
            );
        }
    }
}

#[test]
fn dynamic_regret_matches_stepwise_recomputation() {
    let mut rng = rng_for(4, &[]);
    for seed in 0..20 {
        let cfg = GeometricEnvConfig::benchmark(4, 3000, 0.5);
        let inst = generate_geometric_instance(&cfg, &mut rng_for(seed, &[])).unwrap();
        let pulls: Vec<usize> = (0..3000).map(|_| rng.random_range(0..4)).collect();
        let mut brute = 0.0;
        for (i, &a) in pulls.iter().enumerate() {
            let t = i + 1;
            let k = inst.change_points().iter().filter(|&&c| c <= t).count();
            let row = &inst.means()[k];
            let best = row.iter().copied().fold(f64::MIN, f64::max);
            brute += best - row[a];
        }
        assert_abs_diff_eq!(dynamic_regret(&pulls, &inst).unwrap(), brute, epsilon = 1e-12);
    }
}

#[test]
fn episode_regret_equals_regret_of_its_pull_sequence() {
    for seed in 0..10 {
        let cfg = GeometricEnvConfig::benchmark(3, 4000, 0.5);
        let inst = generate_geometric_instance(&cfg, &mut rng_for(seed, &[0])).unwrap();
        let dab = Dab::new(
            DabConfig::new(3, 4000, 0.0, 0.5),
            IndexPolicy::new(PolicyKind::KlUcb { c: 3.0 }, 3).unwrap(),
            NeverAlarm::default(),
        )
        .unwrap();
        let rec = run_episode(dab.clone(), &inst, &mut rng_for(seed, &[1])).unwrap();
        let again = run_episode(dab, &inst, &mut rng_for(seed, &[1])).unwrap();
        assert_eq!(rec, again);
        let pulls: Vec<usize> = rec.arms().collect();
        assert_abs_diff_eq!(
            rec.final_regret,
            dynamic_regret(&pulls, &inst).unwrap(),
            epsilon = 1e-9
        );
    }
}

#[test]
fn gap_summary_matches_exhaustive_loops() {
    for seed in 0..50 {
        let cfg = GeometricEnvConfig::benchmark(2 + (seed % 5) as usize, 2000, 0.4);
        let inst = generate_geometric_instance(&cfg, &mut rng_for(seed, &[])).unwrap();
        let g = inst.compute_gaps();
        let mut worst_subopt: f64 = 0.0;
        for (k, row) in inst.means().iter().enumerate() {
            for a in 0..inst.num_arms() {
                let mut best = f64::MIN;
                for b in 0..inst.num_arms() {
                    best = best.max(row[b]);
                }
                assert_eq!(g.subopt_gaps[k][a], best - row[a]);
                worst_subopt = worst_subopt.max(best - row[a]);
            }
        }
        assert_eq!(g.max_subopt_gap, worst_subopt);
        let mut min_gap: Option<f64> = None;
        for k in 1..inst.means().len() {
            let mut shift: f64 = 0.0;
            for a in 0..inst.num_arms() {
                shift = shift.max((inst.means()[k][a] - inst.means()[k - 1][a]).abs());
            }
            assert_eq!(g.change_gaps[k - 1], shift);
            min_gap = Some(min_gap.map_or(shift, |m| m.min(shift)));
        }
        assert_eq!(g.min_change_gap, min_gap);
        let mut starts = vec![1];
        starts.extend_from_slice(inst.change_points());
        let sep = starts.windows(2).map(|w| w[1] - w[0]).min();
        assert_eq!(g.min_separation, sep);
    }
}

#[test]
fn oracle_best_mean_matches_linear_scan() {
    let cfg = GeometricEnvConfig::benchmark(5, 5000, 0.4);
    let inst = generate_geometric_instance(&cfg, &mut rng_for(5, &[])).unwrap();
    for t in 1..=5000 {
        let best = (0..5).map(|a| inst.mean(a, t)).fold(f64::MIN, f64::max);
        assert_eq!(inst.oracle_best_mean(t), best);
    }
}

#[test]
fn geometric_interval_lengths_have_the_expected_mean() {
    let horizon = 100_000usize;
    let cfg = GeometricEnvConfig::benchmark(5, horizon, 0.7);
    let (mut total, mut count) = (0usize, 0usize);
    for i in 0..10_000u64 {
        let inst = generate_geometric_instance(&cfg, &mut rng_for(6, &[i])).unwrap();
        let mut prev = 1;
        for &c in inst.change_points() {
            total += c - prev;
            count += 1;
            prev = c;
        }
    }
    let mean = total as f64 / count as f64;
    let expected = (horizon as f64).powf(0.7);
    assert!((mean - expected).abs() <= 0.05 * expected, "{mean} vs {expected}");
}

#[test]
fn stationary_regret_respects_the_worst_case_bound() {
    let (arms, horizon) = (5usize, 10_000usize);
    let sigma2 = 0.25;
    let bound = 8.0 * (sigma2 * arms as f64 * horizon as f64 * (horizon as f64).ln()).sqrt();
    for kind in [
        PolicyKind::Ucb { sigma: 1.0 },
        PolicyKind::KlUcb { c: 3.0 },
        PolicyKind::Moss { sigma: 1.0, horizon },
    ] {
        let mut total = 0.0;
        for seed in 0..20 {
            let mut rng = rng_for(7, &[seed]);
            let means: Vec<f64> = (0..arms).map(|_| rng.random_range(0.1..0.9)).collect();
            let inst = PiecewiseInstance::stationary(means, horizon, ArmModel::bernoulli()).unwrap();
            let dab = Dab::new(
                DabConfig::new(arms, horizon, 0.0, 0.5),
                IndexPolicy::new(kind, arms).unwrap(),
                NeverAlarm::default(),
            )
            .unwrap();
            total += run_episode(dab, &inst, &mut rng).unwrap().final_regret;
        }
        let mean = total / 20.0;
        assert!(mean < bound, "{} regret {mean} above {bound}", kind.label());
    }
}
