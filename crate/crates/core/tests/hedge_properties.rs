use rand::Rng;
use rand_chacha::ChaCha8Rng;
use riskrates::hedge::{hedged_risk, hedged_risk_with, HedgeOptions};
use riskrates::risk::{shortfall, LossFunction};
use riskrates::rng::stream_rng;
use riskrates::{RiskSpec, ScenarioSet, StrategySet};

const TOL: f64 = 1e-8;

fn random_scenarios(rng: &mut ChaCha8Rng, e: usize) -> ScenarioSet {
    let n = rng.gen_range(3..12);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let f = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let g = (0..n).map(|_| (0..e).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    ScenarioSet::new(raw.iter().map(|w| w / total).collect(), f, g).unwrap()
}

fn risks() -> Vec<RiskSpec> {
    vec![
        RiskSpec::Avar { u: 0.7 },
        RiskSpec::Oce {
            loss: LossFunction::power(2.0).unwrap(),
        },
        RiskSpec::Sharpness { eps: 0.5 },
    ]
}

fn sets() -> Vec<StrategySet> {
    vec![
        StrategySet::Box {
            lo: vec![-1.0, -0.5],
            hi: vec![1.0, 2.0],
        },
        StrategySet::Simplex { e: 2 },
    ]
}

fn random_point(rng: &mut ChaCha8Rng, set: &StrategySet) -> Vec<f64> {
    match set {
        StrategySet::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect(),
        StrategySet::Simplex { e } => {
            let raw: Vec<f64> = (0..*e).map(|_| -rng.gen_range(1e-12..1.0f64).ln()).collect();
            let total: f64 = raw.iter().sum();
            raw.iter().map(|x| x / total).collect()
        }
        StrategySet::Singleton { g } => g.clone(),
    }
}

#[test]
fn optimum_is_an_upper_bound_certificate() {
    let mut rng = stream_rng(1, 0);
    for risk in risks() {
        for set in sets() {
            let sc = random_scenarios(&mut rng, 2);
            let best = hedged_risk(&sc, &risk, &set, TOL).unwrap();
            assert!(set.contains(&best.g_star, 1e-9));
            for _ in 0..50 {
                let g = random_point(&mut rng, &set);
                let v = risk.evaluate(&sc.position(&g).unwrap(), 1e-12).unwrap();
                assert!(best.value <= v + TOL, "{risk:?} {set:?}: {} > {v} at {g:?}", best.value);
            }
        }
    }
}

#[test]
fn objective_is_midpoint_convex() {
    let mut rng = stream_rng(2, 0);
    for risk in risks() {
        for set in sets() {
            let sc = random_scenarios(&mut rng, 2);
            let obj = |g: &[f64]| risk.evaluate(&sc.position(g).unwrap(), 1e-12).unwrap();
            for _ in 0..20 {
                let a = random_point(&mut rng, &set);
                let b = random_point(&mut rng, &set);
                let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
                assert!(obj(&mid) <= 0.5 * (obj(&a) + obj(&b)) + 1e-9);
            }
        }
    }
}

#[test]
fn simplex_solutions_are_feasible() {
    let mut rng = stream_rng(3, 0);
    for e in 1..=4 {
        for risk in risks() {
            let sc = random_scenarios(&mut rng, e);
            let r = hedged_risk(&sc, &risk, &StrategySet::Simplex { e }, TOL).unwrap();
            assert!(r.g_star.iter().all(|g| *g >= -1e-9));
            assert!((r.g_star.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn shortfall_without_hedging_matches_direct_evaluation() {
    let mut rng = stream_rng(4, 0);
    for loss in [LossFunction::Exp, LossFunction::power(1.5).unwrap(), LossFunction::avar(0.4).unwrap()] {
        for _ in 0..10 {
            let sc = random_scenarios(&mut rng, 2);
            let risk = RiskSpec::Shortfall { loss };
            let hedged = hedged_risk(&sc, &risk, &StrategySet::zero(2), TOL).unwrap();
            let direct = shortfall(&sc.position(&[0.0, 0.0]).unwrap(), &loss, TOL).unwrap();
            assert!((hedged.value - direct).abs() <= TOL, "{loss:?}: {} vs {direct}", hedged.value);
        }
    }
}

#[test]
fn hedged_shortfall_is_below_unhedged() {
    let mut rng = stream_rng(5, 0);
    let risk = RiskSpec::Shortfall { loss: LossFunction::Exp };
    for set in sets() {
        let sc = random_scenarios(&mut rng, 2);
        let hedged = hedged_risk(&sc, &risk, &set, 1e-7).unwrap();
        let at_star = risk.evaluate(&sc.position(&hedged.g_star).unwrap(), 1e-12).unwrap();
        assert!((hedged.value - at_star).abs() <= 1e-6, "{} vs {at_star}", hedged.value);
        for _ in 0..20 {
            let g = random_point(&mut rng, &set);
            let v = risk.evaluate(&sc.position(&g).unwrap(), 1e-12).unwrap();
            assert!(hedged.value <= v + 1e-6);
        }
    }
}

#[test]
fn more_restarts_do_not_change_the_value() {
    let mut rng = stream_rng(6, 0);
    for risk in risks() {
        for set in sets() {
            let sc = random_scenarios(&mut rng, 2);
            let one = hedged_risk_with(&sc, &risk, &set, TOL, HedgeOptions::default()).unwrap();
            let two = hedged_risk_with(
                &sc,
                &risk,
                &set,
                TOL,
                HedgeOptions {
                    restarts: 2,
                    ..HedgeOptions::default()
                },
            )
            .unwrap();
            assert!((one.value - two.value).abs() < TOL, "{risk:?}: {} vs {}", one.value, two.value);
        }
    }
}
