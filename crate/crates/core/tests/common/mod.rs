//! Brute-force oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use dab_core::detect::Variant;
use rand::Rng;

/// Log-likelihood of `xs` under mean `mu`, up to terms that do not depend on `mu`.
pub fn log_likelihood(xs: &[f64], mu: f64, variant: Variant) -> f64 {
    match variant {
        Variant::Gaussian { sigma } => {
            -xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (2.0 * sigma * sigma)
        }
        Variant::Bernoulli => xs
            .iter()
            .map(|&x| {
                let a = if x > 0.0 { x * mu.ln() } else { 0.0 };
                let b = if x < 1.0 { (1.0 - x) * (1.0 - mu).ln() } else { 0.0 };
                a + b
            })
            .sum(),
    }
}

/// Maximum of a unimodal `f` on `[lo, hi]` by golden-section search, endpoints included.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-15 {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    [f(lo), f(hi), fc, fd, f((a + b) / 2.0)]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn max_log_likelihood(xs: &[f64], variant: Variant) -> f64 {
    let (lo, hi) = match variant {
        Variant::Gaussian { .. } => xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
            (l.min(x), h.max(x))
        }),
        Variant::Bernoulli => (0.0, 1.0),
    };
    golden_max(|mu| log_likelihood(xs, mu, variant), lo, hi)
}

/// Split log-likelihood ratio from raw samples, maximizing each likelihood numerically.
pub fn brute_split_llr(xs: &[f64], s: usize, variant: Variant) -> f64 {
    if s == xs.len() {
        return 0.0;
    }
    max_log_likelihood(&xs[..s], variant) + max_log_likelihood(&xs[s..], variant)
        - max_log_likelihood(xs, variant)
}

/// `max_s ℓ_s` over every split.
pub fn brute_glr(xs: &[f64], variant: Variant) -> f64 {
    (1..=xs.len())
        .map(|s| brute_split_llr(xs, s, variant))
        .fold(0.0, f64::max)
}

/// `log((1/n) Σ_s exp ℓ_s)` over every split.
pub fn brute_gsr(xs: &[f64], variant: Variant) -> f64 {
    let llrs: Vec<f64> = (1..=xs.len()).map(|s| brute_split_llr(xs, s, variant)).collect();
    let max = llrs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + llrs.iter().map(|v| (v - max).exp()).sum::<f64>().ln() - (xs.len() as f64).ln()
}

/// Random test sequence: binary or continuous in `[0, 1]` for Bernoulli, Gaussian
/// otherwise, optionally with a mean shift part-way.
pub fn random_sequence<R: Rng>(rng: &mut R, variant: Variant, max_len: usize) -> Vec<f64> {
    let n = rng.random_range(2..=max_len);
    let change = rng.random_range(1..=n);
    let (m0, m1) = (rng.random::<f64>(), rng.random::<f64>());
    let binary = rng.random_bool(0.7);
    (0..n)
        .map(|i| {
            let m = if i < change { m0 } else { m1 };
            match variant {
                Variant::Bernoulli if binary => f64::from(u8::from(rng.random::<f64>() < m)),
                Variant::Bernoulli => (m + 0.3 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0),
                Variant::Gaussian { sigma } => {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    m + sigma * z
                }
            }
        })
        .collect()
}

pub fn prefix_sums(xs: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(xs.len() + 1);
    p.push(0.0);
    for x in xs {
        p.push(p.last().unwrap() + x);
    }
    p
}
