//! Streaming change detectors: GLR and generalized Shiryaev-Roberts (GSR)
//! statistics in Gaussian and Bernoulli-KL variants.
//!
//! Statistics are computed from running prefix sums, so a push is `O(1)` and
//! an evaluation is `O(n / split_stride)` (GLR) or `O(n)` (GSR).
//!
//! For a split `s` of `x_1..x_n` with segment means `μ̂₁ = mean(x_1..x_s)`,
//! `μ̂₂ = mean(x_{s+1}..x_n)` and overall mean `μ̂`, the split log-likelihood
//! ratio is
//!
//! ```text
//! Gaussian:   ℓ_s = s (n − s) (μ̂₁ − μ̂₂)² / (2 n σ²)
//! Bernoulli:  ℓ_s = s·kl(μ̂₁, μ̂) + (n − s)·kl(μ̂₂, μ̂)
//! ```
//!
//! with `ℓ_n = 0`. GLR takes `G_n = max_s ℓ_s`, GSR takes
//! `log W_n = log( (1/n) Σ_{s=1}^{n} exp ℓ_s )`.

mod latency;

pub use latency::{measure_latency_profile, LatencyModel, LatencyProfile, LatencyRequest, StreamModel};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kl::{clamp_mean, xlogx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatisticKind {
    Glr,
    Gsr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Known-variance Gaussian likelihood.
    Gaussian { sigma: f64 },
    /// Bernoulli likelihood (KL form).
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// `6 ln(1 + ln n) + (5/2) ln(4 n^{3/2} / δ_F) + 11`.
    Theoretical,
    /// `ln(4 n^{3/2} / δ_F)`.
    Practical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub kind: StatisticKind,
    pub variant: Variant,
    pub threshold: ThresholdMode,
    /// False-alarm level `δ_F`.
    pub delta_f: f64,
    /// Evaluate the statistic only when the sample count is a multiple of this.
    pub test_stride: usize,
    /// GLR only: candidate splits are multiples of this.
    pub split_stride: usize,
}

impl DetectorConfig {
    pub fn new(kind: StatisticKind, variant: Variant, delta_f: f64) -> Self {
        Self {
            kind,
            variant,
            threshold: ThresholdMode::Practical,
            delta_f,
            test_stride: 1,
            split_stride: 1,
        }
    }

    pub fn with_threshold(mut self, threshold: ThresholdMode) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_strides(mut self, test_stride: usize, split_stride: usize) -> Self {
        self.test_stride = test_stride;
        self.split_stride = split_stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.test_stride == 0 || self.split_stride == 0 {
            return Err(Error::Config("detector strides must be at least 1".into()));
        }
        if !(self.delta_f > 0.0 && self.delta_f < 1.0) {
            return Err(Error::Config(format!(
                "delta_f must lie in (0, 1), got {}",
                self.delta_f
            )));
        }
        if let Variant::Gaussian { sigma } = self.variant {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::Config(format!(
                    "detector sigma must be positive, got {sigma}"
                )));
            }
        }
        Ok(())
    }

    /// `B-GLR`, `G-GSR`, ...
    pub fn label(&self) -> String {
        let v = match self.variant {
            Variant::Gaussian { .. } => "G",
            Variant::Bernoulli => "B",
        };
        let k = match self.kind {
            StatisticKind::Glr => "GLR",
            StatisticKind::Gsr => "GSR",
        };
        format!("{v}-{k}")
    }

    /// Alarm level for the statistic after `n` samples. GSR compares
    /// `log W_n` against `β(n, δ_F) + ln n`.
    pub fn alarm_level(&self, n: usize) -> f64 {
        let beta = beta_threshold(n, self.delta_f, self.threshold);
        match self.kind {
            StatisticKind::Glr => beta,
            StatisticKind::Gsr => beta + (n as f64).ln(),
        }
    }
}

pub fn beta_threshold(n: usize, delta_f: f64, mode: ThresholdMode) -> f64 {
    let n = n.max(1) as f64;
    let core = (4.0 * n.powf(1.5) / delta_f).ln();
    match mode {
        ThresholdMode::Theoretical => 6.0 * (1.0 + n.ln()).ln() + 2.5 * core + 11.0,
        ThresholdMode::Practical => core,
    }
}

/// Split log-likelihood ratio `ℓ_s` from prefix sums (`prefix[i] = x_1 + … + x_i`).
pub fn split_llr(prefix: &[f64], n: usize, s: usize, variant: Variant) -> f64 {
    debug_assert!(s >= 1 && s <= n && n < prefix.len());
    if s == n {
        return 0.0;
    }
    let total = prefix[n];
    let head = prefix[s];
    let (sf, rf, nf) = (s as f64, (n - s) as f64, n as f64);
    match variant {
        Variant::Gaussian { sigma } => {
            let diff = head / sf - (total - head) / rf;
            (sf * rf * diff * diff / (2.0 * nf * sigma * sigma)).max(0.0)
        }
        Variant::Bernoulli => {
            let logs = BernoulliRef::new(total / nf);
            logs.weighted_kl(head / sf, sf) + logs.weighted_kl((total - head) / rf, rf)
        }
    }
}

/// Cached `ln q`, `ln(1 − q)` of the pooled mean for repeated `kl(·, q)`.
struct BernoulliRef {
    q: f64,
    log_q: f64,
    log_not_q: f64,
}

impl BernoulliRef {
    fn new(q: f64) -> Self {
        let clamped = clamp_mean(q);
        Self {
            q,
            log_q: clamped.ln(),
            log_not_q: (1.0 - clamped).ln(),
        }
    }

    #[inline]
    fn weighted_kl(&self, p: f64, weight: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        if p == self.q {
            return 0.0;
        }
        let kl = xlogx(p) + xlogx(1.0 - p) - p * self.log_q - (1.0 - p) * self.log_not_q;
        weight * kl.max(0.0)
    }
}

/// `G_n`: maximum split LLR over splits that are multiples of `split_stride`.
pub fn glr_statistic(prefix: &[f64], n: usize, variant: Variant, split_stride: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let stride = split_stride.max(1);
    match variant {
        Variant::Gaussian { .. } => (stride..n)
            .step_by(stride)
            .map(|s| split_llr(prefix, n, s, variant))
            .fold(0.0, f64::max),
        Variant::Bernoulli => {
            let total = prefix[n];
            let nf = n as f64;
            let q = total / nf;
            if clamp_mean(q) != q {
                return (stride..n)
                    .step_by(stride)
                    .map(|s| split_llr(prefix, n, s, variant))
                    .fold(0.0, f64::max);
            }
            // With q the pooled mean, s·kl(p₁, q) + r·kl(p₂, q) equals
            // s·h(p₁) + r·h(p₂) − n·h(q) for h(p) = p ln p + (1 − p) ln(1 − p).
            let h = |p: f64| xlogx(p) + xlogx(1.0 - p);
            let pooled = nf * h(q);
            let mut best = 0.0f64;
            for s in (stride..n).step_by(stride) {
                let head = prefix[s];
                let (sf, rf) = (s as f64, nf - s as f64);
                let p1 = (head / sf).clamp(0.0, 1.0);
                let p2 = ((total - head) / rf).clamp(0.0, 1.0);
                best = best.max(sf * h(p1) + rf * h(p2) - pooled);
            }
            best
        }
    }
}

/// `log W_n` over all splits `s ∈ {1, …, n}`, via log-sum-exp.
pub fn gsr_statistic(prefix: &[f64], n: usize, variant: Variant) -> f64 {
    if n < 1 {
        return 0.0;
    }
    let llrs: Vec<f64> = (1..=n).map(|s| split_llr(prefix, n, s, variant)).collect();
    log_sum_exp(&llrs) - (n as f64).ln()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Contract between the composer and a per-arm change detector.
pub trait Detector {
    /// Appends a sample and reports whether the detector is in alarm.
    fn push_and_test(&mut self, sample: f64) -> bool;

    /// Clears the history and any alarm.
    fn reset(&mut self);

    /// Samples seen since the last reset.
    fn samples(&self) -> usize;
}

/// One evaluation of a detector statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub alarm: bool,
}

/// GLR/GSR detector over one arm's sample history.
#[derive(Debug, Clone)]
pub struct StreamDetector {
    config: DetectorConfig,
    /// `prefix[i]` is the sum of the first `i` samples; `prefix[0] = 0`.
    prefix: Vec<f64>,
    alarmed: bool,
    last_evaluated: usize,
    trace: Option<Vec<TraceRow>>,
}

impl StreamDetector {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            prefix: vec![0.0],
            alarmed: false,
            last_evaluated: 0,
            trace: None,
        })
    }

    /// Records every evaluation for later export with [`StreamDetector::trace_csv`].
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn alarmed(&self) -> bool {
        self.alarmed
    }

    /// Sample count at the most recent evaluation (0 if none yet).
    pub fn last_evaluated(&self) -> usize {
        self.last_evaluated
    }

    pub fn prefix_sums(&self) -> &[f64] {
        &self.prefix
    }

    /// Current value of the configured statistic (`G_n` or `log W_n`).
    pub fn statistic(&self) -> f64 {
        let n = self.samples();
        match self.config.kind {
            StatisticKind::Glr => {
                glr_statistic(&self.prefix, n, self.config.variant, self.config.split_stride)
            }
            StatisticKind::Gsr => gsr_statistic(&self.prefix, n, self.config.variant),
        }
    }

    pub fn trace(&self) -> &[TraceRow] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Trace rows as CSV with header `n,statistic,threshold,alarm`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("n,statistic,threshold,alarm\n");
        for row in self.trace() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                row.n,
                row.statistic,
                row.threshold,
                u8::from(row.alarm)
            );
        }
        out
    }
}

impl Detector for StreamDetector {
    fn push_and_test(&mut self, sample: f64) -> bool {
        if self.alarmed {
            return true;
        }
        let last = *self.prefix.last().unwrap_or(&0.0);
        self.prefix.push(last + sample);
        let n = self.samples();
        if !n.is_multiple_of(self.config.test_stride) {
            return false;
        }
        let statistic = self.statistic();
        let threshold = self.config.alarm_level(n);
        self.last_evaluated = n;
        self.alarmed = statistic >= threshold;
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRow {
                n,
                statistic,
                threshold,
                alarm: self.alarmed,
            });
        }
        self.alarmed
    }

    fn reset(&mut self) {
        self.prefix.clear();
        self.prefix.push(0.0);
        self.alarmed = false;
        self.last_evaluated = 0;
        if let Some(trace) = self.trace.as_mut() {
            trace.clear();
        }
    }

    fn samples(&self) -> usize {
        self.prefix.len() - 1
    }
}

/// Detector that never alarms; turns the composer into its bare policy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeverAlarm {
    samples: usize,
}

impl Detector for NeverAlarm {
    fn push_and_test(&mut self, _sample: f64) -> bool {
        self.samples += 1;
        false
    }

    fn reset(&mut self) {
        self.samples = 0;
    }

    fn samples(&self) -> usize {
        self.samples
    }
}

/// Closed set of detectors used by the experiment harness.
#[derive(Debug, Clone)]
pub enum AnyDetector {
    Never(NeverAlarm),
    Stream(StreamDetector),
}

impl Detector for AnyDetector {
    fn push_and_test(&mut self, sample: f64) -> bool {
        match self {
            AnyDetector::Never(d) => d.push_and_test(sample),
            AnyDetector::Stream(d) => d.push_and_test(sample),
        }
    }

    fn reset(&mut self) {
        match self {
            AnyDetector::Never(d) => d.reset(),
            AnyDetector::Stream(d) => d.reset(),
        }
    }

    fn samples(&self) -> usize {
        match self {
            AnyDetector::Never(d) => d.samples(),
            AnyDetector::Stream(d) => d.samples(),
        }
    }
}
