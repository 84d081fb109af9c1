//! Closed-form reference values and brute-force references.
//!
//! These are deliberately independent of the evaluators in [`crate::risk`]:
//! nothing here sorts atoms, bisects, or walks quantile pieces.

use crate::error::{Error, Result};

/// Default truncation for [`dyadic_sum`].
pub const DYADIC_TERMS: usize = 400;

/// AVaR of a Bernoulli(p) law: `min(p / (1 − u), 1)`.
pub fn avar_bernoulli(p: f64, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "[0, 1]"));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain("u", u, "[0, 1)"));
    }
    Ok((p / (1.0 - u)).min(1.0))
}

/// AVaR of the Pareto tail law with density `q x^(−q−1)` on `[1, ∞)`:
/// `q / (q − 1) · (1 − u)^(−1/q)`.
pub fn avar_pareto(q: f64, u: f64) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::domain("q", q, "(1, ∞)"));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain("u", u, "[0, 1)"));
    }
    Ok(q / (q - 1.0) * (1.0 - u).powf(-1.0 / q))
}

/// The sharpness risk of Bernoulli(a): `(1 − a^ε) a + a^ε`, attained at
/// `x = 1/a`.
pub fn sharpness_two_point(a: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::domain("a", a, "[0, 1]"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain("eps", eps, "(0, ∞)"));
    }
    let ae = a.powf(eps);
    Ok((1.0 - ae) * a + ae)
}

/// `Σ_{n=1}^{n_max} 2^(−a n) · min(x 2^n, 2^(b n))` for `0 ≤ b < a < 1`.
///
/// Fails if `n_max` leaves a geometric tail `2^((b − a) n_max)` of 1e−12 or
/// more.
pub fn dyadic_sum(a: f64, b: f64, x: f64, n_max: usize) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain("a", a, "(0, 1)"));
    }
    if !(b >= 0.0 && b < a) {
        return Err(Error::domain("b", b, "[0, a)"));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::domain("x", x, "[0, ∞)"));
    }
    let tail = ((b - a) * n_max as f64).exp2();
    if tail >= 1e-12 {
        return Err(Error::Parameter(format!(
            "n_max = {n_max} leaves a tail of {tail:e}"
        )));
    }
    Ok((1..=n_max)
        .map(|n| {
            let n = n as f64;
            (-a * n).exp2() * (x * n.exp2()).min((b * n).exp2())
        })
        .sum())
}

/// Minimum of `f` over `points` equally spaced nodes of `[lo, hi]`; ties go
/// to the leftmost node.
pub fn grid_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Result<(f64, f64)> {
    if !(lo < hi) {
        return Err(Error::Parameter(format!("empty interval [{lo}, {hi}]")));
    }
    if points < 2 {
        return Err(Error::Parameter("grid needs at least two points".into()));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, f(lo));
    for i in 1..points {
        let x = if i + 1 == points { hi } else { lo + step * i as f64 };
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Binomial(n, p) probabilities for k = 0..=n, computed in log space.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p <= 0.0 || p >= 1.0 {
        let mut pmf = vec![0.0; n + 1];
        pmf[if p <= 0.0 { 0 } else { n }] = 1.0;
        return pmf;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut log_choose = 0.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            (log_choose + k as f64 * lp + (n - k) as f64 * lq).exp()
        })
        .collect()
}

/// `E[f(K / n)]` for `K ~ Binomial(n, p)`.
pub fn binomial_expectation(n: usize, p: f64, f: impl Fn(f64) -> f64) -> f64 {
    binomial_pmf(n, p)
        .iter()
        .enumerate()
        .map(|(k, pk)| pk * f(k as f64 / n as f64))
        .sum()
}
