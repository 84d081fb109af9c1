//! The sharpness family
//! `ρ(X) = sup_{x ≥ 1} (1 − x^(−ε)) AVaR₀(X) + x^(−ε) AVaR_{1−1/x}(X)`.
//!
//! With `t = 1/x` the tail integral `T(t) = t · AVaR_{1−t}` is piecewise
//! linear in `t`, breaking where `t` equals the cumulative mass of the top
//! atoms. Between breakpoints the objective reads
//! `μ̄ + x^(−ε)(a − μ̄) + s · x^(1−ε)` for the current atom `a` and the
//! accumulated excess `s ≥ 0`; its only interior critical point solves
//! `ε(a − μ̄) = (1 − ε) s x`.

use super::check_sharpness_exponent;
use crate::dist::Discrete;
use crate::error::Result;

pub fn sharpness_risk(dist: &Discrete, eps: f64) -> Result<f64> {
    check_sharpness_exponent(eps)?;
    let mean = dist.mean();
    let objective = |x: f64, tail_avar: f64| {
        let w = x.powf(-eps);
        (1.0 - w) * mean + w * tail_avar
    };

    // x = 1 gives AVaR₀ = mean
    let mut best = mean;
    let mut mass_above = 0.0; // c_{k-1}
    let mut sum_above = 0.0; // S_{k-1}
    let n = dist.len();
    for (k, (a, w)) in dist.atoms().iter().zip(dist.weights()).rev().enumerate() {
        let excess = sum_above - mass_above * a;
        if eps < 1.0 && excess > 0.0 {
            let x = eps * (a - mean) / ((1.0 - eps) * excess);
            let in_piece = x >= 1.0 && x * (mass_above + w) >= 1.0 && x * mass_above <= 1.0;
            if in_piece {
                best = best.max(objective(x, a + excess * x));
            }
        }
        mass_above += w;
        sum_above += w * a;
        if k + 1 == n {
            break;
        }
        if mass_above <= 1.0 {
            best = best.max(objective(1.0 / mass_above, sum_above / mass_above));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::sharpness_two_point;
    use crate::risk::avar;

    // direct evaluation of the defining supremum on a geometric grid
    fn brute(dist: &Discrete, eps: f64, points: usize, x_max: f64) -> f64 {
        let mean = dist.mean();
        (0..points)
            .map(|i| {
                let x = x_max.powf(i as f64 / (points - 1) as f64);
                let u = (1.0 - 1.0 / x).clamp(0.0, 1.0 - 1e-16);
                let w = x.powf(-eps);
                (1.0 - w) * mean + w * avar(dist, u).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn bernoulli_quarter() {
        let d = Discrete::bernoulli(0.25).unwrap();
        assert!((sharpness_risk(&d, 0.5).unwrap() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn point_mass() {
        for eps in [0.1, 0.5, 1.0] {
            assert_eq!(sharpness_risk(&Discrete::point(-2.5).unwrap(), eps).unwrap(), -2.5);
        }
    }

    #[test]
    fn three_atoms_against_grid_sup() {
        let d = Discrete::new(vec![0.0, 1.0, 2.0], vec![0.5, 0.25, 0.25]).unwrap();
        let exact = sharpness_risk(&d, 0.5).unwrap();
        let grid = brute(&d, 0.5, 1_000_000, 1e6);
        assert!((exact - grid).abs() < 1e-6, "{exact} vs {grid}");
        // breakpoint x = 4 carries the sup: 0.75 (1 - 1/2) + 2 / 2
        assert!((exact - 1.375).abs() < 1e-12);
    }

    #[test]
    fn irregular_laws_against_grid_sup() {
        let laws = [
            Discrete::new(vec![-3.0, 0.5, 0.7, 9.0], vec![0.4, 0.3, 0.25, 0.05]).unwrap(),
            Discrete::new(vec![1.0, 2.0, 4.0, 8.0, 16.0], vec![0.5, 0.2, 0.15, 0.1, 0.05]).unwrap(),
        ];
        for d in &laws {
            for eps in [0.2, 0.5, 0.9, 1.0] {
                let exact = sharpness_risk(d, eps).unwrap();
                let grid = brute(d, eps, 200_000, 1e4);
                assert!(exact >= grid - 1e-12, "{exact} < {grid}");
                assert!(exact - grid < 1e-3, "{exact} vs {grid}");
            }
        }
    }

    #[test]
    fn two_point_closed_form() {
        for i in 0..=20 {
            let a = i as f64 / 20.0;
            let d = Discrete::bernoulli(a).unwrap();
            for eps in [0.25, 0.5, 1.0] {
                let v = sharpness_risk(&d, eps).unwrap();
                assert!((v - sharpness_two_point(a, eps).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exponent_range() {
        let d = Discrete::point(0.0).unwrap();
        assert!(sharpness_risk(&d, 0.0).is_err());
        assert!(sharpness_risk(&d, 1.1).is_err());
    }
}
