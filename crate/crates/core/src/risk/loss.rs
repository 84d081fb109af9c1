//! Loss functions for optimized certainty equivalents and shortfall risk.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A convex, nondecreasing, nonnegative loss `l` with `1 ∈ ∂l(0)`.
///
/// Only the built-in families are supported; tabulated custom losses are
/// rejected at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LossFunction {
    /// `x⁺ / (1 − u)`; the OCE with this loss is AVaR at level `u`.
    AvarLoss { u: f64 },
    /// `eˣ`; the OCE is the entropic risk `log E e^X`, plus one.
    Exp,
    /// `x⁺ + (x⁺)^p / p`.
    Power { p: f64 },
    /// `eˣ` for `x ≤ 0` and `1 + slope·x` above.
    LinearAbove {
        #[serde(default = "unit_slope")]
        slope: f64,
    },
}

fn unit_slope() -> f64 {
    1.0
}

impl LossFunction {
    pub fn avar(u: f64) -> Result<Self> {
        let l = LossFunction::AvarLoss { u };
        l.validate()?;
        Ok(l)
    }

    pub fn power(p: f64) -> Result<Self> {
        let l = LossFunction::Power { p };
        l.validate()?;
        Ok(l)
    }

    pub fn linear_above(slope: f64) -> Result<Self> {
        let l = LossFunction::LinearAbove { slope };
        l.validate()?;
        Ok(l)
    }

    /// Parameter ranges plus a numerical spot check of the shape
    /// requirements on a grid.
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossFunction::AvarLoss { u } if !(0.0..1.0).contains(&u) => {
                return Err(Error::domain("u", u, "[0, 1)"))
            }
            LossFunction::Power { p } if !(p >= 1.0 && p.is_finite()) => {
                return Err(Error::domain("p", p, "[1, ∞)"))
            }
            LossFunction::LinearAbove { slope } if !(slope >= 1.0 && slope.is_finite()) => {
                return Err(Error::domain("slope", slope, "[1, ∞)"))
            }
            _ => {}
        }
        self.check_shape()
    }

    fn check_shape(&self) -> Result<()> {
        let grid: Vec<f64> = (0..=1000).map(|i| -5.0 + 10.0 * i as f64 / 1000.0).collect();
        let values: Vec<f64> = grid.iter().map(|x| self.value(*x)).collect();
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::Contract(format!("{self} is negative somewhere")));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Contract(format!("{self} is not nondecreasing")));
        }
        for w in grid.windows(3).step_by(2) {
            let mid = self.value(w[1]);
            let chord = 0.5 * (self.value(w[0]) + self.value(w[2]));
            if mid > chord + 1e-9 {
                return Err(Error::Contract(format!("{self} fails midpoint convexity at {}", w[1])));
            }
        }
        if !(self.left_derivative(0.0) <= 1.0 && 1.0 <= self.right_derivative(0.0)) {
            return Err(Error::Contract(format!("1 is not a subgradient of {self} at 0")));
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            LossFunction::AvarLoss { u } => x.max(0.0) / (1.0 - u),
            LossFunction::Exp => x.exp(),
            LossFunction::Power { p } => {
                let xp = x.max(0.0);
                xp + xp.powf(p) / p
            }
            LossFunction::LinearAbove { slope } => {
                if x <= 0.0 {
                    x.exp()
                } else {
                    1.0 + slope * x
                }
            }
        }
    }

    pub fn right_derivative(&self, x: f64) -> f64 {
        match *self {
            LossFunction::AvarLoss { u } => {
                if x >= 0.0 {
                    1.0 / (1.0 - u)
                } else {
                    0.0
                }
            }
            LossFunction::Exp => x.exp(),
            LossFunction::Power { p } => {
                if x >= 0.0 {
                    1.0 + x.powf(p - 1.0)
                } else {
                    0.0
                }
            }
            LossFunction::LinearAbove { slope } => {
                if x >= 0.0 {
                    slope
                } else {
                    x.exp()
                }
            }
        }
    }

    pub fn left_derivative(&self, x: f64) -> f64 {
        match *self {
            LossFunction::AvarLoss { u } => {
                if x > 0.0 {
                    1.0 / (1.0 - u)
                } else {
                    0.0
                }
            }
            LossFunction::Exp => x.exp(),
            LossFunction::Power { p } => {
                if x > 0.0 {
                    1.0 + x.powf(p - 1.0)
                } else {
                    0.0
                }
            }
            LossFunction::LinearAbove { slope } => {
                if x > 0.0 {
                    slope
                } else {
                    x.exp()
                }
            }
        }
    }

    /// Degree `p` such that `l` grows like `|x|^p`; `f64::INFINITY` marks
    /// losses usable on bounded inputs only.
    pub fn growth_degree(&self) -> f64 {
        match *self {
            LossFunction::AvarLoss { .. } | LossFunction::LinearAbove { .. } => 1.0,
            LossFunction::Exp => f64::INFINITY,
            LossFunction::Power { p } => p,
        }
    }

    /// `liminf l(x)/x` as `x → ∞`.
    pub fn asymptotic_slope(&self) -> f64 {
        match *self {
            LossFunction::AvarLoss { u } => 1.0 / (1.0 - u),
            LossFunction::Exp => f64::INFINITY,
            LossFunction::Power { p } if p > 1.0 => f64::INFINITY,
            LossFunction::Power { .. } => 2.0,
            LossFunction::LinearAbove { slope } => slope,
        }
    }

    /// Points where `l` is not differentiable.
    pub fn kinks(&self) -> &'static [f64] {
        match self {
            LossFunction::Exp => &[],
            _ => &[0.0],
        }
    }

    /// Whether `l` is strictly increasing on the whole line.
    pub fn is_strictly_increasing(&self) -> bool {
        matches!(self, LossFunction::Exp | LossFunction::LinearAbove { .. })
    }

    /// Checks the conditions for use on laws with unbounded support:
    /// polynomial growth and `liminf l(x)/x > 1`.
    pub fn check_unbounded_use(&self) -> Result<()> {
        if self.growth_degree().is_infinite() {
            return Err(Error::Contract(format!(
                "{self} has no polynomial growth bound; bounded inputs only"
            )));
        }
        if self.asymptotic_slope() <= 1.0 {
            return Err(Error::Contract(format!(
                "{self} needs liminf l(x)/x > 1 on unbounded inputs"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for LossFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossFunction::AvarLoss { u } => write!(f, "avar-loss({u})"),
            LossFunction::Exp => write!(f, "exp"),
            LossFunction::Power { p } => write!(f, "power({p})"),
            LossFunction::LinearAbove { slope } => write!(f, "linear-above({slope})"),
        }
    }
}
