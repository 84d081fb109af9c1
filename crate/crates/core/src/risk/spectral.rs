use serde::{Deserialize, Serialize};

use super::avar;
use crate::dist::{Discrete, WEIGHT_SUM_TOL};
use crate::error::{Error, Result};

/// One atom `(u, mass)` of a mixing measure on `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralLevel {
    pub u: f64,
    pub mass: f64,
}

/// A finite mixture of AVaR levels with a penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralComponent {
    pub gamma: Vec<SpectralLevel>,
    pub beta: f64,
}

impl SpectralComponent {
    fn validate(&self) -> Result<()> {
        if self.gamma.is_empty() {
            return Err(Error::EmptyInput("spectral component without levels".into()));
        }
        for level in &self.gamma {
            if !(0.0..1.0).contains(&level.u) {
                return Err(Error::domain("u", level.u, "[0, 1)"));
            }
            if !(level.mass >= 0.0) {
                return Err(Error::domain("mass", level.mass, "[0, ∞)"));
            }
        }
        let total: f64 = self.gamma.iter().map(|l| l.mass).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Parameter(format!("mixing masses sum to {total}, not 1")));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::domain("beta", self.beta, "[0, ∞)"));
        }
        Ok(())
    }

    /// `Σ mass · AVaR_u(X) − beta`.
    pub fn evaluate(&self, dist: &Discrete) -> Result<f64> {
        let mixture = self
            .gamma
            .iter()
            .map(|l| avar(dist, l.u).map(|v| l.mass * v))
            .sum::<Result<f64>>()?;
        Ok(mixture - self.beta)
    }
}

/// A nonempty finite family of penalized AVaR mixtures; the risk is the
/// largest penalized mixture value.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFamily {
    components: Vec<SpectralComponent>,
}

impl SpectralFamily {
    pub fn new(components: Vec<SpectralComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyInput("spectral family without components".into()));
        }
        components.iter().try_for_each(SpectralComponent::validate)?;
        Ok(Self { components })
    }

    pub fn components(&self) -> &[SpectralComponent] {
        &self.components
    }
}

pub fn spectral_risk(dist: &Discrete, family: &SpectralFamily) -> Result<f64> {
    family
        .components
        .iter()
        .map(|c| c.evaluate(dist))
        .try_fold(f64::NEG_INFINITY, |best, v| v.map(|v| best.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(u: f64, beta: f64) -> SpectralComponent {
        SpectralComponent {
            gamma: vec![SpectralLevel { u, mass: 1.0 }],
            beta,
        }
    }

    #[test]
    fn reduces_to_avar() {
        let d = Discrete::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.25; 4]).unwrap();
        let mean = SpectralFamily::new(vec![single(0.0, 0.0)]).unwrap();
        assert_eq!(spectral_risk(&d, &mean).unwrap(), 2.5);
        let half = SpectralFamily::new(vec![single(0.5, 0.0)]).unwrap();
        assert!((spectral_risk(&d, &half).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn penalty_dominance() {
        let d = Discrete::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.25; 4]).unwrap();
        let family = SpectralFamily::new(vec![
            single(0.0, 0.0),
            SpectralComponent {
                gamma: vec![SpectralLevel { u: 0.5, mass: 0.5 }, SpectralLevel { u: 0.9, mass: 0.5 }],
                beta: 10.0,
            },
        ])
        .unwrap();
        assert_eq!(spectral_risk(&d, &family).unwrap(), 2.5);
    }

    #[test]
    fn invalid_families() {
        assert!(SpectralFamily::new(vec![]).is_err());
        assert!(SpectralFamily::new(vec![single(1.0, 0.0)]).is_err());
        assert!(SpectralFamily::new(vec![single(0.5, -1.0)]).is_err());
        let unnormalized = SpectralComponent {
            gamma: vec![SpectralLevel { u: 0.2, mass: 0.7 }],
            beta: 0.0,
        };
        assert!(SpectralFamily::new(vec![unnormalized]).is_err());
    }
}
