//! Exact evaluation of law-invariant risk measures on finite discrete laws.
//!
//! Positive outcomes are losses: larger atoms are riskier.

mod loss;
mod sharpness;
mod spectral;

use serde::{Deserialize, Serialize};

pub use loss::LossFunction;
pub use sharpness::sharpness_risk;
pub use spectral::{spectral_risk, SpectralComponent, SpectralFamily, SpectralLevel};

use crate::dist::{check_level, Discrete};
use crate::error::{Error, Result};

/// Iteration cap shared by the bisection solvers.
pub const MAX_BISECTION_STEPS: usize = 200;

/// Default absolute accuracy for the OCE and shortfall solvers.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A law-invariant risk measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RiskSpec {
    Avar { u: f64 },
    Oce { loss: LossFunction },
    #[serde(rename = "sf")]
    Shortfall { loss: LossFunction },
    Spectral { components: Vec<SpectralComponent> },
    Sharpness { eps: f64 },
}

impl RiskSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            RiskSpec::Avar { u } => check_level(*u),
            RiskSpec::Oce { loss } | RiskSpec::Shortfall { loss } => loss.validate(),
            RiskSpec::Spectral { components } => SpectralFamily::new(components.clone()).map(|_| ()),
            RiskSpec::Sharpness { eps } => check_sharpness_exponent(*eps),
        }
    }

    /// Extra requirements when the underlying law has unbounded support.
    pub fn check_unbounded_use(&self) -> Result<()> {
        match self {
            RiskSpec::Oce { loss } | RiskSpec::Shortfall { loss } => loss.check_unbounded_use(),
            _ => Ok(()),
        }
    }

    /// ρ(X) for X distributed as `dist`; `tol` is the solver accuracy for
    /// OCE and shortfall and is ignored by the closed-form evaluators.
    pub fn evaluate(&self, dist: &Discrete, tol: f64) -> Result<f64> {
        match self {
            RiskSpec::Avar { u } => avar(dist, *u),
            RiskSpec::Oce { loss } => oce(dist, loss, tol).map(|r| r.value),
            RiskSpec::Shortfall { loss } => shortfall(dist, loss, tol),
            RiskSpec::Spectral { components } => {
                spectral_risk(dist, &SpectralFamily::new(components.clone())?)
            }
            RiskSpec::Sharpness { eps } => sharpness_risk(dist, *eps),
        }
    }

    pub fn is_shortfall(&self) -> bool {
        matches!(self, RiskSpec::Shortfall { .. })
    }
}

pub(crate) fn check_sharpness_exponent(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("eps", eps, "(0, 1]"))
    }
}

/// Average value at risk at level `u`: the mean of the worst `1 − u` of the
/// probability mass, with the atom straddling the `u`-quantile counted
/// fractionally.
pub fn avar(dist: &Discrete, u: f64) -> Result<f64> {
    check_level(u)?;
    if u == 0.0 {
        return Ok(dist.mean());
    }
    let tail = 1.0 - u;
    let mut remaining = tail;
    let mut acc = 0.0;
    for (x, w) in dist.atoms().iter().zip(dist.weights()).rev() {
        if *w >= remaining {
            acc += remaining * x;
            remaining = 0.0;
            break;
        }
        acc += w * x;
        remaining -= w;
    }
    // rounding in the weights can leave a sliver of mass unassigned
    if remaining > 0.0 {
        acc += remaining * dist.min();
    }
    Ok(acc / tail)
}

/// Outcome of the OCE minimization over the cash variable `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OceResult {
    pub value: f64,
    pub minimizer_m: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Optimized certainty equivalent `inf_m E[l(X − m)] + m`.
///
/// Bisection on the sign of the right derivative `1 − E[l'₋(X − m)]`
/// locates the left end of the minimizer set. The starting bracket is
/// `[−B, B]` with `B = 1 + max|atom|`, which contains every atom; the
/// minimizer set meets `[min atom, max atom]`. If the objective is flat all
/// the way down to `−B` (slope exactly one above zero) the reported
/// minimizer is `−B`.
pub fn oce(dist: &Discrete, loss: &LossFunction, tol: f64) -> Result<OceResult> {
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "(0, ∞)"));
    }
    let objective = |m: f64| dist.expect(|x| loss.value(x - m)) + m;
    let right_slope = |m: f64| 1.0 - dist.expect(|x| loss.left_derivative(x - m));

    let bound = 1.0 + dist.min().abs().max(dist.max().abs());
    let bracket = (-bound, bound);
    let (mut lo, mut hi) = bracket;
    let mut iterations = 0;
    if right_slope(lo) >= 0.0 {
        hi = lo;
    }
    while hi - lo >= tol {
        if iterations == MAX_BISECTION_STEPS {
            return Err(Error::NoConvergence {
                iterations,
                residual: hi - lo,
            });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if right_slope(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // Piecewise-linear losses attain the minimum at a kink; check those
    // inside the final bracket as well as its right end.
    let mut best = (hi, objective(hi));
    for x in dist.atoms() {
        for k in loss.kinks() {
            let m = x - k;
            if m >= lo && m <= hi {
                let v = objective(m);
                if v < best.1 || (v == best.1 && m < best.0) {
                    best = (m, v);
                }
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::NoConvergence {
            iterations,
            residual: f64::INFINITY,
        });
    }
    Ok(OceResult {
        value: best.1,
        minimizer_m: best.0,
        bracket,
        iterations,
    })
}

/// Shortfall risk: the unique `m` with `E[l(X − m)] = 1`.
///
/// `m ↦ E[l(X − m)]` is decreasing; the bracket starts at
/// `[min atom − 1, max atom + 1]` and is widened geometrically until it
/// straddles one, then bisected to width `tol`.
pub fn shortfall(dist: &Discrete, loss: &LossFunction, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "(0, ∞)"));
    }
    let expected_loss = |m: f64| Ok(dist.expect(|x| loss.value(x - m)));
    let (mut lo, mut hi) = (dist.min() - 1.0, dist.max() + 1.0);
    root_bracket_and_bisect(expected_loss, &mut lo, &mut hi, tol)
}

/// Finds the crossing of level one of a decreasing function of `m`. Shared
/// with the nested hedged shortfall solver.
pub(crate) fn root_bracket_and_bisect(
    mut h: impl FnMut(f64) -> Result<f64>,
    lo: &mut f64,
    hi: &mut f64,
    tol: f64,
) -> Result<f64> {
    let mut width = (*hi - *lo).max(1.0);
    let mut expansions = 0;
    loop {
        let (h_lo, h_hi) = (h(*lo)?, h(*hi)?);
        if h_lo >= 1.0 && h_hi <= 1.0 {
            break;
        }
        if expansions == 64 {
            return Err(Error::Infeasible(format!(
                "expected loss never crosses 1 on [{lo}, {hi}]"
            )));
        }
        if h_lo < 1.0 {
            *lo -= width;
        }
        if h_hi > 1.0 {
            *hi += width;
        }
        width *= 2.0;
        expansions += 1;
    }
    let mut iterations = 0;
    while *hi - *lo >= tol {
        if iterations == MAX_BISECTION_STEPS {
            return Err(Error::NoConvergence {
                iterations,
                residual: *hi - *lo,
            });
        }
        let mid = 0.5 * (*lo + *hi);
        if mid <= *lo || mid >= *hi {
            break;
        }
        iterations += 1;
        if h(mid)? > 1.0 {
            *lo = mid;
        } else {
            *hi = mid;
        }
    }
    Ok(0.5 * (*lo + *hi))
}
