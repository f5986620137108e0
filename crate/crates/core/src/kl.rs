//! Bernoulli Kullback-Leibler divergence helpers shared by the klUCB index and
//! the Bernoulli detection statistics.

/// Clamp applied to Bernoulli means that appear inside a logarithm.
pub const MEAN_CLAMP: f64 = 1e-9;

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Clamps a mean into `[MEAN_CLAMP, 1 - MEAN_CLAMP]`.
#[inline]
pub fn clamp_mean(p: f64) -> f64 {
    p.clamp(MEAN_CLAMP, 1.0 - MEAN_CLAMP)
}

/// Bernoulli KL divergence `kl(p, q)`.
///
/// `p` is used as given (with `0 ln 0 = 0`), `q` is clamped away from the
/// boundary so the result is always finite. Equal means give exactly 0.
#[inline]
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if p == q {
        return 0.0;
    }
    let q = clamp_mean(q);
    let v = xlogx(p) - p * q.ln() + xlogx(1.0 - p) - (1.0 - p) * (1.0 - q).ln();
    v.max(0.0)
}
