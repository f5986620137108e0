//! Piecewise-stationary bandit environments.
//!
//! Time is 1-based (`t ∈ 1..=T`), arms are 0-based. Interval `k` (0-based)
//! covers `ν_k ≤ t < ν_{k+1}` with the sentinels `ν_0 = 1` and
//! `ν_{N+1} = T + 1`; only the interior change-points are stored.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};

/// Reward distribution family shared by every arm of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardFamily {
    Bernoulli,
    Gaussian,
}

/// Reward family plus its sub-Gaussian scale `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmModel {
    pub family: RewardFamily,
    pub sigma: f64,
}

impl ArmModel {
    /// Bernoulli rewards; rewards in `[0, 1]` are `1/4`-sub-Gaussian.
    pub fn bernoulli() -> Self {
        Self {
            family: RewardFamily::Bernoulli,
            sigma: 0.5,
        }
    }

    pub fn gaussian(sigma: f64) -> Self {
        Self {
            family: RewardFamily::Gaussian,
            sigma,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.family {
            RewardFamily::Bernoulli if self.sigma != 0.5 => Err(Error::Config(format!(
                "Bernoulli arm model has sigma fixed at 0.5, got {}",
                self.sigma
            ))),
            RewardFamily::Gaussian if !(self.sigma > 0.0 && self.sigma.is_finite()) => Err(Error::Config(
                format!("Gaussian sigma must be positive, got {}", self.sigma),
            )),
            _ => Ok(()),
        }
    }
}

/// Ground truth of a piecewise-stationary bandit problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseInstance {
    num_arms: usize,
    horizon: usize,
    change_points: Vec<usize>,
    /// `means[k][a]`: mean of arm `a` on interval `k`.
    means: Vec<Vec<f64>>,
    arm_model: ArmModel,
}

impl PiecewiseInstance {
    pub fn new(
        num_arms: usize,
        horizon: usize,
        change_points: Vec<usize>,
        means: Vec<Vec<f64>>,
        arm_model: ArmModel,
    ) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::Config(format!("need at least 2 arms, got {num_arms}")));
        }
        if horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        arm_model.validate()?;
        let mut prev = 1;
        for &c in &change_points {
            if c <= prev || c > horizon {
                return Err(Error::Config(format!(
                    "change-points must be strictly increasing within 2..={horizon}, got {c} after {prev}"
                )));
            }
            prev = c;
        }
        if means.len() != change_points.len() + 1 {
            return Err(Error::Config(format!(
                "{} change-points need {} mean rows, got {}",
                change_points.len(),
                change_points.len() + 1,
                means.len()
            )));
        }
        for (k, row) in means.iter().enumerate() {
            if row.len() != num_arms {
                return Err(Error::Config(format!(
                    "interval {k} has {} means, expected {num_arms}",
                    row.len()
                )));
            }
            for &m in row {
                if !m.is_finite() {
                    return Err(Error::Config(format!("interval {k} has non-finite mean")));
                }
                if arm_model.family == RewardFamily::Bernoulli && !(0.0..=1.0).contains(&m) {
                    return Err(Error::Config(format!(
                        "Bernoulli mean {m} on interval {k} is outside [0, 1]"
                    )));
                }
            }
        }
        for k in 1..means.len() {
            let shift = max_abs_shift(&means[k - 1], &means[k]);
            if shift <= 0.0 {
                return Err(Error::Config(format!(
                    "no arm changes its mean at change-point {}",
                    change_points[k - 1]
                )));
            }
        }
        Ok(Self {
            num_arms,
            horizon,
            change_points,
            means,
            arm_model,
        })
    }

    /// A single stationary interval covering the whole horizon.
    pub fn stationary(means: Vec<f64>, horizon: usize, arm_model: ArmModel) -> Result<Self> {
        let arms = means.len();
        Self::new(arms, horizon, Vec::new(), vec![means], arm_model)
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Interior change-points `ν_1 < … < ν_N`.
    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    pub fn num_changes(&self) -> usize {
        self.change_points.len()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn arm_model(&self) -> ArmModel {
        self.arm_model
    }

    /// Start time `ν_k` of interval `k`, including both sentinels.
    pub fn interval_start(&self, k: usize) -> usize {
        if k == 0 {
            1
        } else if k <= self.change_points.len() {
            self.change_points[k - 1]
        } else {
            self.horizon + 1
        }
    }

    /// 0-based index of the interval containing `t`.
    pub fn interval_of(&self, t: usize) -> usize {
        self.change_points.partition_point(|&c| c <= t)
    }

    pub fn mean(&self, arm: usize, t: usize) -> f64 {
        self.means[self.interval_of(t)][arm]
    }

    /// `max_a μ_{a,k(t)}`.
    pub fn oracle_best_mean(&self, t: usize) -> f64 {
        row_max(&self.means[self.interval_of(t)])
    }

    fn check_arm_time(&self, arm: usize, t: usize) -> Result<()> {
        if arm >= self.num_arms {
            return Err(Error::InvalidArgument(format!(
                "arm {arm} out of range for {} arms",
                self.num_arms
            )));
        }
        if t < 1 || t > self.horizon {
            return Err(Error::InvalidArgument(format!(
                "time {t} outside 1..={}",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Draws the reward of `arm` at time `t`.
    pub fn sample_reward<R: Rng + ?Sized>(&self, arm: usize, t: usize, rng: &mut R) -> Result<f64> {
        self.check_arm_time(arm, t)?;
        Ok(draw_reward(self.arm_model, self.mean(arm, t), rng))
    }

    pub fn compute_gaps(&self) -> GapSummary {
        let subopt_gaps: Vec<Vec<f64>> = self
            .means
            .iter()
            .map(|row| {
                let best = row_max(row);
                row.iter().map(|m| best - m).collect()
            })
            .collect();
        let change_gaps: Vec<f64> = self
            .means
            .windows(2)
            .map(|w| max_abs_shift(&w[0], &w[1]))
            .collect();
        let max_subopt_gap = subopt_gaps.iter().flatten().copied().fold(0.0, f64::max);
        let min_change_gap = change_gaps.iter().copied().reduce(f64::min);
        let min_separation = (1..=self.change_points.len())
            .map(|k| self.interval_start(k) - self.interval_start(k - 1))
            .min();
        GapSummary {
            subopt_gaps,
            change_gaps,
            min_change_gap,
            max_subopt_gap,
            min_separation,
        }
    }
}

/// One reward draw from an arm with the given mean; no range checks.
pub fn draw_reward<R: Rng + ?Sized>(model: ArmModel, mean: f64, rng: &mut R) -> f64 {
    match model.family {
        RewardFamily::Bernoulli => {
            if rng.random::<f64>() < mean {
                1.0
            } else {
                0.0
            }
        }
        RewardFamily::Gaussian => {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            mean + model.sigma * z
        }
    }
}

fn row_max(row: &[f64]) -> f64 {
    row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn max_abs_shift(before: &[f64], after: &[f64]) -> f64 {
    before
        .iter()
        .zip(after)
        .map(|(a, b)| (b - a).abs())
        .fold(0.0, f64::max)
}

/// Gap quantities of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSummary {
    /// `Δ_{a,k}` indexed `[k][a]`.
    pub subopt_gaps: Vec<Vec<f64>>,
    /// `Δ_{c,k}` for each interior change-point.
    pub change_gaps: Vec<f64>,
    /// Smallest change gap; `None` without change-points.
    pub min_change_gap: Option<f64>,
    /// `C = max Δ_{a,k}`.
    pub max_subopt_gap: f64,
    /// `L_T = min_k (ν_k − ν_{k−1})`; `None` without change-points.
    pub min_separation: Option<usize>,
}

/// Which arms move at a change-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChangeScope {
    /// One uniformly chosen arm.
    OneArm,
    /// Every arm, each with its own magnitude and sign.
    #[default]
    AllArms,
}

/// Random environments with i.i.d. geometric interval lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricEnvConfig {
    pub num_arms: usize,
    pub horizon: usize,
    /// Change probability per step is `T^{-xi}`.
    pub xi: f64,
    pub magnitude_range: (f64, f64),
    pub initial_mean_range: (f64, f64),
    pub arm_model: ArmModel,
    pub scope: ChangeScope,
}

impl GeometricEnvConfig {
    /// Bernoulli arms, change magnitudes in `[0.1, 0.4]`, initial means in
    /// `[0.1, 0.9]`, every arm moving at each change-point.
    pub fn benchmark(num_arms: usize, horizon: usize, xi: f64) -> Self {
        Self {
            num_arms,
            horizon,
            xi,
            magnitude_range: (0.1, 0.4),
            initial_mean_range: (0.1, 0.9),
            arm_model: ArmModel::bernoulli(),
            scope: ChangeScope::AllArms,
        }
    }

    pub fn change_probability(&self) -> f64 {
        (self.horizon as f64).powf(-self.xi)
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
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(Error::Config(format!("xi must lie in (0, 1), got {}", self.xi)));
        }
        self.arm_model.validate()?;
        let (lo, hi) = self.magnitude_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Config(format!("infeasible magnitude range [{lo}, {hi}]")));
        }
        let (ilo, ihi) = self.initial_mean_range;
        if !(ilo <= ihi && ilo.is_finite() && ihi.is_finite()) {
            return Err(Error::Config(format!(
                "infeasible initial mean range [{ilo}, {ihi}]"
            )));
        }
        if self.arm_model.family == RewardFamily::Bernoulli {
            if ilo < 0.0 || ihi > 1.0 {
                return Err(Error::Config(format!(
                    "Bernoulli initial means [{ilo}, {ihi}] must lie in [0, 1]"
                )));
            }
            if hi > 1.0 {
                return Err(Error::Config(format!(
                    "Bernoulli change magnitude {hi} exceeds 1"
                )));
            }
        }
        Ok(())
    }
}

/// Samples an instance: interval lengths i.i.d. `Geometric(T^{-ξ})` on `{1, 2, …}`,
/// one uniformly chosen arm (or every arm, per `scope`) shifting by a uniform
/// magnitude and sign at each change-point, reflected into `[0, 1]` for
/// Bernoulli arms.
pub fn generate_geometric_instance<R: Rng + ?Sized>(
    cfg: &GeometricEnvConfig,
    rng: &mut R,
) -> Result<PiecewiseInstance> {
    cfg.validate()?;
    let geometric = Geometric::new(cfg.change_probability())
        .map_err(|e| Error::Config(format!("geometric parameter: {e}")))?;

    let mut change_points = Vec::new();
    let mut at = 1usize;
    loop {
        let len = geometric.sample(rng).saturating_add(1);
        at = match usize::try_from(len).ok().and_then(|l| at.checked_add(l)) {
            Some(next) if next <= cfg.horizon => next,
            _ => break,
        };
        change_points.push(at);
    }

    let (ilo, ihi) = cfg.initial_mean_range;
    let first: Vec<f64> = (0..cfg.num_arms).map(|_| uniform(rng, ilo, ihi)).collect();
    let mut means = Vec::with_capacity(change_points.len() + 1);
    means.push(first);
    for _ in &change_points {
        let mut row = means.last().cloned().unwrap_or_default();
        match cfg.scope {
            ChangeScope::OneArm => {
                let arm = rng.random_range(0..cfg.num_arms);
                row[arm] = shifted_mean(cfg, row[arm], rng);
            }
            ChangeScope::AllArms => {
                for mean in row.iter_mut() {
                    *mean = shifted_mean(cfg, *mean, rng);
                }
            }
        }
        means.push(row);
    }
    PiecewiseInstance::new(cfg.num_arms, cfg.horizon, change_points, means, cfg.arm_model)
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn shifted_mean<R: Rng + ?Sized>(cfg: &GeometricEnvConfig, old: f64, rng: &mut R) -> f64 {
    let (lo, hi) = cfg.magnitude_range;
    loop {
        let magnitude = uniform(rng, lo, hi);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut new = old + sign * magnitude;
        if cfg.arm_model.family == RewardFamily::Bernoulli {
            if new > 1.0 {
                new = 2.0 - new;
            } else if new < 0.0 {
                new = -new;
            }
        }
        if new != old {
            return new;
        }
    }
}

// Line-oriented text form:
//
//   arms <A>
//   horizon <T>
//   model bernoulli|gaussian <sigma>
//   change <nu>        (one per change-point, increasing)
//   means <m_1> … <m_A> (one per interval, in order)
//
// Blank lines and lines starting with '#' are ignored.
impl fmt::Display for PiecewiseInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# piecewise-stationary bandit instance")?;
        writeln!(f, "arms {}", self.num_arms)?;
        writeln!(f, "horizon {}", self.horizon)?;
        let family = match self.arm_model.family {
            RewardFamily::Bernoulli => "bernoulli",
            RewardFamily::Gaussian => "gaussian",
        };
        writeln!(f, "model {family} {:?}", self.arm_model.sigma)?;
        for c in &self.change_points {
            writeln!(f, "change {c}")?;
        }
        for row in &self.means {
            write!(f, "means")?;
            for m in row {
                write!(f, " {m:?}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for PiecewiseInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut arms = None;
        let mut horizon = None;
        let mut model = None;
        let mut changes = Vec::new();
        let mut means = Vec::new();
        for (i, raw) in s.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let mut fields = line.split_whitespace();
            let key = fields.next().unwrap_or_default();
            let rest: Vec<&str> = fields.collect();
            let one = |rest: &[&str]| -> Result<usize> {
                match rest {
                    [v] => v.parse().map_err(|e| err(format!("{key}: {e}"))),
                    _ => Err(err(format!("{key} takes exactly one value"))),
                }
            };
            match key {
                "arms" => arms = Some(one(&rest)?),
                "horizon" => horizon = Some(one(&rest)?),
                "change" => changes.push(one(&rest)?),
                "model" => {
                    let [family, sigma] = rest.as_slice() else {
                        return Err(err("model takes a family and a sigma".into()));
                    };
                    let sigma: f64 = sigma.parse().map_err(|e| err(format!("sigma: {e}")))?;
                    model = Some(match *family {
                        "bernoulli" => ArmModel {
                            family: RewardFamily::Bernoulli,
                            sigma,
                        },
                        "gaussian" => ArmModel::gaussian(sigma),
                        other => return Err(err(format!("unknown family '{other}'"))),
                    });
                }
                "means" => {
                    let row = rest
                        .iter()
                        .map(|v| v.parse::<f64>().map_err(|e| err(format!("mean: {e}"))))
                        .collect::<Result<Vec<_>>>()?;
                    means.push(row);
                }
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        let missing = |what: &str| Error::Parse {
            line: 0,
            message: format!("missing '{what}' line"),
        };
        Self::new(
            arms.ok_or_else(|| missing("arms"))?,
            horizon.ok_or_else(|| missing("horizon"))?,
            changes,
            means,
            model.ok_or_else(|| missing("model"))?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_interval() -> PiecewiseInstance {
        PiecewiseInstance::new(
            2,
            100,
            vec![51],
            vec![vec![0.9, 0.5], vec![0.2, 0.5]],
            ArmModel::bernoulli(),
        )
        .unwrap()
    }

    #[test]
    fn degenerate_bernoulli_draws() {
        let inst = PiecewiseInstance::stationary(vec![1.0, 0.0], 10, ArmModel::bernoulli()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 1..=10 {
            assert_eq!(inst.sample_reward(0, t, &mut rng).unwrap(), 1.0);
            assert_eq!(inst.sample_reward(1, t, &mut rng).unwrap(), 0.0);
        }
    }

    #[test]
    fn sample_reward_rejects_bad_arguments() {
        let inst = two_interval();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            inst.sample_reward(2, 1, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            inst.sample_reward(0, 0, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            inst.sample_reward(0, 101, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn gaussian_sample_mean_within_clt_bound() {
        let inst = PiecewiseInstance::stationary(vec![0.5, 0.0], 10, ArmModel::gaussian(0.25)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let sum: f64 = (0..n).map(|_| inst.sample_reward(0, 1, &mut rng).unwrap()).sum();
        let mean = sum / n as f64;
        assert!(
            (mean - 0.5).abs() <= 0.25 * 4.0 / (n as f64).sqrt(),
            "mean {mean}"
        );
    }

    #[test]
    fn interval_lookup_follows_sentinels() {
        let inst = two_interval();
        assert_eq!(inst.interval_of(1), 0);
        assert_eq!(inst.interval_of(50), 0);
        assert_eq!(inst.interval_of(51), 1);
        assert_eq!(inst.interval_of(100), 1);
        assert_eq!(inst.interval_start(0), 1);
        assert_eq!(inst.interval_start(1), 51);
        assert_eq!(inst.interval_start(2), 101);
    }

    #[test]
    fn gaps_single_interval() {
        let inst = PiecewiseInstance::stationary(vec![0.9, 0.5], 10, ArmModel::bernoulli()).unwrap();
        let g = inst.compute_gaps();
        assert_eq!(g.subopt_gaps, vec![vec![0.0, 0.9 - 0.5]]);
        assert_eq!(g.max_subopt_gap, 0.9 - 0.5);
        assert!(g.change_gaps.is_empty());
        assert_eq!(g.min_change_gap, None);
        assert_eq!(g.min_separation, None);
    }

    #[test]
    fn gaps_two_intervals() {
        let g = two_interval().compute_gaps();
        assert_eq!(g.change_gaps, vec![0.9 - 0.2]);
        assert_eq!(g.min_change_gap, Some(0.9 - 0.2));
        assert_eq!(g.min_separation, Some(50));
    }

    #[test]
    fn best_mean_examples() {
        let inst = two_interval();
        assert_eq!(inst.oracle_best_mean(10), 0.9);
        assert_eq!(inst.oracle_best_mean(60), 0.5);
        let tie = PiecewiseInstance::stationary(vec![0.3, 0.3], 5, ArmModel::bernoulli()).unwrap();
        assert_eq!(tie.oracle_best_mean(3), 0.3);
    }

    #[test]
    fn rejects_invalid_instances() {
        let b = ArmModel::bernoulli();
        assert!(PiecewiseInstance::new(1, 10, vec![], vec![vec![0.5]], b).is_err());
        assert!(PiecewiseInstance::new(2, 10, vec![1], vec![vec![0.5, 0.1]; 2], b).is_err());
        assert!(PiecewiseInstance::new(2, 10, vec![5, 5], vec![vec![0.5, 0.1]; 3], b).is_err());
        // no real change at the change-point
        assert!(PiecewiseInstance::new(2, 10, vec![5], vec![vec![0.5, 0.1]; 2], b).is_err());
        assert!(PiecewiseInstance::new(2, 10, vec![], vec![vec![1.5, 0.1]], b).is_err());
        assert!(PiecewiseInstance::stationary(vec![0.0, 1.0], 10, ArmModel::gaussian(0.0)).is_err());
    }

    #[test]
    fn geometric_rejects_infeasible_config() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cfg = GeometricEnvConfig::benchmark(5, 1000, 0.5);
        cfg.magnitude_range = (0.0, 0.4);
        assert!(generate_geometric_instance(&cfg, &mut rng).is_err());
        cfg.magnitude_range = (0.5, 0.4);
        assert!(generate_geometric_instance(&cfg, &mut rng).is_err());
        let mut cfg = GeometricEnvConfig::benchmark(5, 1000, 1.5);
        assert!(generate_geometric_instance(&cfg, &mut rng).is_err());
        cfg.xi = 0.5;
        cfg.initial_mean_range = (0.5, 1.2);
        assert!(generate_geometric_instance(&cfg, &mut rng).is_err());
    }

    #[test]
    fn benchmark_change_rate() {
        let cfg = GeometricEnvConfig::benchmark(5, 10_000, 0.5);
        assert!((cfg.change_probability() - 0.01).abs() < 1e-15);
        assert!((cfg.change_probability() * 10_000.0 - 100.0).abs() < 1e-9);
    }

    #[test]
    fn change_scope_controls_moving_arms() {
        for (scope, moved) in [(ChangeScope::OneArm, 1), (ChangeScope::AllArms, 4)] {
            let cfg = GeometricEnvConfig {
                scope,
                ..GeometricEnvConfig::benchmark(4, 5000, 0.5)
            };
            let inst = generate_geometric_instance(&cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
            assert!(inst.num_changes() > 10);
            for w in inst.means().windows(2) {
                let n = w[0].iter().zip(&w[1]).filter(|(a, b)| a != b).count();
                assert_eq!(n, moved);
                for (a, b) in w[0].iter().zip(&w[1]) {
                    let d = (a - b).abs();
                    assert!(d <= 0.4 + 1e-12 && (0.0..=1.0).contains(b));
                }
            }
        }
    }

    #[test]
    fn short_horizon_may_have_no_changes() {
        let cfg = GeometricEnvConfig::benchmark(3, 2, 0.9);
        let found = (0..200u64).any(|seed| {
            let inst = generate_geometric_instance(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            inst.num_changes() == 0 && inst.means().len() == 1
        });
        assert!(found);
    }

    #[test]
    fn text_form_round_trips() {
        let cfg = GeometricEnvConfig::benchmark(4, 5000, 0.4);
        let inst = generate_geometric_instance(&cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let text = inst.to_string();
        let back: PiecewiseInstance = text.parse().unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn text_form_reports_bad_lines() {
        let err = "arms 2\nhorizon x\n".parse::<PiecewiseInstance>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = "arms 2\nhorizon 10\nbogus 1\n"
            .parse::<PiecewiseInstance>()
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
