//! Monte Carlo harness for the plug-in estimation error.
//!
//! For each sample size `N` and replication `r` a sample is drawn on the
//! stream keyed by `(seed, N, r)`, its empirical law is turned into a
//! scenario set, and the plug-in value is compared to the value under the
//! true law. All reports of one configuration are derived from a single
//! [`Simulation`], so the mean error, the exceedance frequencies and the bias
//! see the same per-replication errors. Replications run in parallel and are
//! reduced in replication order, which keeps every report bitwise identical
//! across thread counts.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{sample_stream, Discrete, Distribution};
use crate::error::{Error, Result};
use crate::hedge::{hedged_risk, utility_max, ScenarioSet, StrategySet, Utility};
use crate::oracle::{avar_pareto, sharpness_two_point};
use crate::risk::{check_sharpness_exponent, RiskSpec};
use crate::rng::replication_stream;

/// Sample size of the empirical reference used when no closed form exists.
pub const REFERENCE_SAMPLE_SIZE: usize = 1_000_000;

/// Relative slack on exceedance thresholds so that errors equal to `ε` up to
/// rounding count as exceedances.
const THRESHOLD_SLACK: f64 = 1e-12;

/// An option payoff written on the underlying `x`, net of its price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptionPayoff {
    /// `x − E_μ[X]`, priced under the true law.
    Centered,
    /// `x − x̄_N`, priced at the sample mean of the data at hand.
    SampleCentered,
    /// `x` at price zero.
    Identity,
}

impl OptionPayoff {
    fn net_payoff(self, x: f64, true_mean: f64, sample_mean: f64) -> f64 {
        match self {
            OptionPayoff::Centered => x - true_mean,
            OptionPayoff::SampleCentered => x - sample_mean,
            OptionPayoff::Identity => x,
        }
    }
}

/// Serializable utility choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum UtilitySpec {
    Linear,
    /// `−exp(−a x)`.
    Exp {
        #[serde(default = "unit")]
        a: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl From<UtilitySpec> for Utility {
    fn from(u: UtilitySpec) -> Self {
        match u {
            UtilitySpec::Linear => Utility::Linear,
            UtilitySpec::Exp { a } => Utility::Exponential { a },
        }
    }
}

/// What is estimated: hedged risk or maximal expected utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    Risk(RiskSpec),
    Utility(UtilitySpec),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dist: Distribution,
    pub objective: Objective,
    /// Position is the underlying itself; these are the traded options.
    pub options: Vec<OptionPayoff>,
    pub strategies: StrategySet,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    /// Solver accuracy passed to the hedging and risk routines.
    pub tol: f64,
}

impl ExperimentConfig {
    /// Plain (unhedged) risk estimation with default accuracy.
    pub fn risk(dist: Distribution, risk: RiskSpec, n_grid: Vec<usize>, replications: usize, seed: u64) -> Self {
        Self {
            dist,
            objective: Objective::Risk(risk),
            options: Vec::new(),
            strategies: StrategySet::zero(0),
            n_grid,
            replications,
            seed,
            epsilons: Vec::new(),
            tol: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        match &self.objective {
            Objective::Risk(r) => {
                r.validate()?;
                if !self.dist.is_bounded() {
                    r.check_unbounded_use()?;
                }
            }
            Objective::Utility(u) => Utility::from(*u).validate()?,
        }
        self.strategies.validate()?;
        if self.strategies.dim() != self.options.len() {
            return Err(Error::Parameter(format!(
                "{} options but a {}-dimensional strategy set",
                self.options.len(),
                self.strategies.dim()
            )));
        }
        if self.n_grid.is_empty() || self.n_grid.iter().any(|n| *n < 2) {
            return Err(Error::Parameter("n_grid must be nonempty with every N ≥ 2".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("n_grid must be strictly increasing".into()));
        }
        if self.replications < 10 {
            return Err(Error::Parameter("at least 10 replications are required".into()));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Parameter("epsilons must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("tol", self.tol, "(0, ∞)"));
        }
        Ok(())
    }

    fn scenarios(&self, law: &Discrete, true_mean: f64) -> Result<ScenarioSet> {
        if self.options.is_empty() {
            return Ok(ScenarioSet::unhedged(law));
        }
        let sample_mean = law.mean();
        let rows = law
            .atoms()
            .iter()
            .map(|x| {
                self.options
                    .iter()
                    .map(|o| o.net_payoff(*x, true_mean, sample_mean))
                    .collect()
            })
            .collect();
        ScenarioSet::new(law.weights().to_vec(), law.atoms().to_vec(), rows)
    }

    fn value_on(&self, law: &Discrete, true_mean: f64) -> Result<f64> {
        let scenarios = self.scenarios(law, true_mean)?;
        let strategies = if self.options.is_empty() {
            &StrategySet::zero(0)
        } else {
            &self.strategies
        };
        match &self.objective {
            Objective::Risk(r) => hedged_risk(&scenarios, r, strategies, self.tol).map(|h| h.value),
            Objective::Utility(u) => {
                utility_max(&scenarios, &Utility::from(*u), strategies, self.tol).map(|h| h.value)
            }
        }
    }

    fn is_unhedged(&self) -> bool {
        match &self.strategies {
            _ if self.options.is_empty() => true,
            StrategySet::Singleton { g } => g.iter().all(|x| *x == 0.0),
            _ => false,
        }
    }
}

/// The estimation target, flagged when it comes from a large empirical
/// reference instead of an exact computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrueValue {
    pub value: f64,
    pub approximate: bool,
}

/// `π^μ(F)` for the configured law.
pub fn true_value(config: &ExperimentConfig) -> Result<TrueValue> {
    config.validate()?;
    let true_mean = config.dist.mean()?;
    if let Some(law) = config.dist.to_discrete() {
        let value = config.value_on(&law?, true_mean)?;
        return Ok(TrueValue {
            value,
            approximate: false,
        });
    }
    if let (Distribution::ParetoTail { q }, Objective::Risk(RiskSpec::Avar { u })) =
        (&config.dist, &config.objective)
    {
        if config.is_unhedged() {
            return Ok(TrueValue {
                value: avar_pareto(*q, *u)?,
                approximate: false,
            });
        }
    }
    let reference = sample_stream(&config.dist, REFERENCE_SAMPLE_SIZE, config.seed, u64::MAX)?;
    let law = Discrete::from_sample(&reference.values)?;
    Ok(TrueValue {
        value: config.value_on(&law, true_mean)?,
        approximate: true,
    })
}

/// Signed plug-in errors `plug-in − true` for one sample size, in
/// replication order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub signed_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    pub truth: TrueValue,
    pub cells: Vec<Cell>,
}

/// Runs every replication of every grid point once.
pub fn simulate(config: &ExperimentConfig) -> Result<Simulation> {
    let truth = true_value(config)?;
    let true_mean = config.dist.mean()?;
    let cells = config
        .n_grid
        .iter()
        .map(|&n| {
            let signed_errors = (0..config.replications)
                .into_par_iter()
                .map(|r| {
                    plug_in(config, n, r, true_mean)
                        .map(|v| v - truth.value)
                        .map_err(|e| Error::Replication {
                            n,
                            replication: r,
                            source: Box::new(e),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Cell { n, signed_errors })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Simulation { truth, cells })
}

fn plug_in(config: &ExperimentConfig, n: usize, r: usize, true_mean: f64) -> Result<f64> {
    let sample = sample_stream(&config.dist, n, config.seed, replication_stream(n, r))?;
    let law = Discrete::from_sample(&sample.values)?;
    config.value_on(&law, true_mean)
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let count = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / count;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
    (mean, (var / count).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub n: usize,
    pub mean_error: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCurve {
    pub points: Vec<RatePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationPoint {
    pub n: usize,
    pub epsilon: f64,
    pub p_hat: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationCurve {
    pub points: Vec<DeviationPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasReport {
    pub n: usize,
    pub mean_signed_error: f64,
    pub std_error: f64,
}

impl Simulation {
    /// Mean absolute error per sample size with its standard error.
    pub fn rate_curve(&self) -> RateCurve {
        let points = self
            .cells
            .iter()
            .map(|c| {
                let (mean_error, std_error) = mean_and_se(c.signed_errors.iter().map(|e| e.abs()));
                RatePoint {
                    n: c.n,
                    mean_error,
                    std_error,
                }
            })
            .collect();
        RateCurve { points }
    }

    /// Exceedance frequencies `#{|error| ≥ ε} / R`.
    pub fn deviation_curve(&self, epsilons: &[f64]) -> DeviationCurve {
        let points = self
            .cells
            .iter()
            .flat_map(|c| {
                epsilons.iter().map(move |&eps| {
                    let threshold = eps * (1.0 - THRESHOLD_SLACK);
                    let hits = c.signed_errors.iter().filter(|e| e.abs() >= threshold).count();
                    DeviationPoint {
                        n: c.n,
                        epsilon: eps,
                        p_hat: hits as f64 / c.signed_errors.len() as f64,
                        replications: c.signed_errors.len(),
                    }
                })
            })
            .collect();
        DeviationCurve { points }
    }

    /// Mean signed error per sample size.
    pub fn bias(&self) -> Vec<BiasReport> {
        self.cells
            .iter()
            .map(|c| {
                let (mean_signed_error, std_error) = mean_and_se(c.signed_errors.iter().copied());
                BiasReport {
                    n: c.n,
                    mean_signed_error,
                    std_error,
                }
            })
            .collect()
    }
}

pub fn mean_error_curve(config: &ExperimentConfig) -> Result<RateCurve> {
    simulate(config).map(|s| s.rate_curve())
}

pub fn deviation_curve(config: &ExperimentConfig) -> Result<DeviationCurve> {
    if config.epsilons.is_empty() {
        return Err(Error::Parameter("deviation needs at least one epsilon".into()));
    }
    simulate(config).map(|s| s.deviation_curve(&config.epsilons))
}

/// Bias of the plug-in estimator at a single sample size.
pub fn bias_report(config: &ExperimentConfig, n: usize) -> Result<BiasReport> {
    if config.replications < 100 {
        return Err(Error::Parameter("bias needs at least 100 replications".into()));
    }
    let single = ExperimentConfig {
        n_grid: vec![n],
        ..config.clone()
    };
    Ok(simulate(&single)?.bias()[0])
}

/// Least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateCurve("need at least two paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateCurve("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Ordinary least squares of `log mean_error` on `log N`.
pub fn fit_rate(curve: &RateCurve) -> Result<RateFit> {
    if curve.points.len() < 2 {
        return Err(Error::DegenerateCurve("need at least two points".into()));
    }
    if let Some(p) = curve.points.iter().find(|p| !(p.mean_error > 0.0)) {
        return Err(Error::DegenerateCurve(format!(
            "mean error {} at N = {}",
            p.mean_error, p.n
        )));
    }
    let xs: Vec<f64> = curve.points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = curve.points.iter().map(|p| p.mean_error.ln()).collect();
    least_squares(&xs, &ys)
}

/// Mean error of the sharpness risk under the drifting law Ber(1/N): the
/// true value and the plug-in on `Ber(p̂_N)` both use the two-point closed
/// form.
pub fn sharpness_curve(eps: f64, n_grid: &[usize], replications: usize, seed: u64) -> Result<RateCurve> {
    check_sharpness_exponent(eps)?;
    if n_grid.is_empty() || n_grid[0] < 4 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("n_grid must be strictly increasing from N ≥ 4".into()));
    }
    if replications < 10 {
        return Err(Error::Parameter("at least 10 replications are required".into()));
    }
    let points = n_grid
        .iter()
        .map(|&n| {
            let p = 1.0 / n as f64;
            let dist = Distribution::bernoulli(p)?;
            let truth = sharpness_two_point(p, eps)?;
            let errors = (0..replications)
                .into_par_iter()
                .map(|r| {
                    let s = sample_stream(&dist, n, seed, replication_stream(n, r))?;
                    let p_hat = s.values.iter().sum::<f64>() / n as f64;
                    Ok((sharpness_two_point(p_hat, eps)? - truth).abs())
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean_error, std_error) = mean_and_se(errors.iter().copied());
            Ok(RatePoint {
                n,
                mean_error,
                std_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurve { points })
}

/// Formats `x` rounded to `digits` significant digits, in the shortest
/// decimal form that reads back as the rounded value.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses");
    rounded.to_string()
}

const CSV_DIGITS: usize = 12;

fn io_error(e: std::io::Error) -> Error {
    Error::Io {
        path: "<csv output>".into(),
        message: e.to_string(),
    }
}

impl RateCurve {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "N,mean_error,std_error").map_err(io_error)?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{}",
                p.n,
                format_sig(p.mean_error, CSV_DIGITS),
                format_sig(p.std_error, CSV_DIGITS)
            )
            .map_err(io_error)?;
        }
        Ok(())
    }
}

impl DeviationCurve {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "N,epsilon,p_hat,R").map_err(io_error)?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{}",
                p.n,
                format_sig(p.epsilon, CSV_DIGITS),
                format_sig(p.p_hat, CSV_DIGITS),
                p.replications
            )
            .map_err(io_error)?;
        }
        Ok(())
    }
}

pub fn write_bias_csv(reports: &[BiasReport], mut w: impl Write) -> Result<()> {
    writeln!(w, "N,mean_signed_error,std_error").map_err(io_error)?;
    for b in reports {
        writeln!(
            w,
            "{},{},{}",
            b.n,
            format_sig(b.mean_signed_error, CSV_DIGITS),
            format_sig(b.std_error, CSV_DIGITS)
        )
        .map_err(io_error)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{binomial_expectation, binomial_pmf};
    use crate::risk::LossFunction;

    fn bernoulli_config(p: f64, risk: RiskSpec, n_grid: Vec<usize>, r: usize) -> ExperimentConfig {
        ExperimentConfig::risk(Distribution::bernoulli(p).unwrap(), risk, n_grid, r, 42)
    }

    #[test]
    fn true_values() {
        let c = bernoulli_config(0.25, RiskSpec::Avar { u: 0.5 }, vec![10], 10);
        assert_eq!(true_value(&c).unwrap(), TrueValue { value: 0.5, approximate: false });
        let c = ExperimentConfig::risk(
            Distribution::discrete(vec![3.0], vec![1.0]).unwrap(),
            RiskSpec::Oce { loss: LossFunction::Exp },
            vec![10],
            10,
            1,
        );
        assert!((true_value(&c).unwrap().value - 3.0 - 1.0).abs() < 1e-9);
        let c = bernoulli_config(0.25, RiskSpec::Sharpness { eps: 0.5 }, vec![10], 10);
        assert!((true_value(&c).unwrap().value - 0.625).abs() < 1e-15);
        let c = ExperimentConfig::risk(Distribution::pareto(2.0).unwrap(), RiskSpec::Avar { u: 0.75 }, vec![10], 10, 1);
        let t = true_value(&c).unwrap();
        assert!(!t.approximate && (t.value - 4.0).abs() < 1e-15);
    }

    #[test]
    fn pareto_oce_needs_slope_condition() {
        let c = ExperimentConfig::risk(
            Distribution::pareto(3.0).unwrap(),
            RiskSpec::Oce { loss: LossFunction::avar(0.0).unwrap() },
            vec![10],
            10,
            1,
        );
        assert!(matches!(true_value(&c), Err(Error::Contract(_))));
    }

    #[test]
    fn point_mass_has_no_error() {
        let c = ExperimentConfig {
            epsilons: vec![0.01, 0.1],
            ..ExperimentConfig::risk(
                Distribution::discrete(vec![2.0], vec![1.0]).unwrap(),
                RiskSpec::Sharpness { eps: 0.5 },
                vec![4, 16, 64],
                20,
                3,
            )
        };
        let sim = simulate(&c).unwrap();
        assert!(sim.rate_curve().points.iter().all(|p| p.mean_error == 0.0 && p.std_error == 0.0));
        assert!(sim.deviation_curve(&c.epsilons).points.iter().all(|p| p.p_hat == 0.0));
        let b = bias_report(&ExperimentConfig { replications: 100, ..c }, 8).unwrap();
        assert_eq!((b.mean_signed_error, b.std_error), (0.0, 0.0));
    }

    #[test]
    fn mean_error_matches_binomial_oracle() {
        let n_grid = vec![100, 400, 1600];
        let c = bernoulli_config(0.3, RiskSpec::Avar { u: 0.0 }, n_grid.clone(), 2000);
        let curve = mean_error_curve(&c).unwrap();
        for (point, n) in curve.points.iter().zip(n_grid) {
            let exact = binomial_expectation(n, 0.3, |p| (p - 0.3).abs());
            let clt = (2.0 / std::f64::consts::PI).sqrt() * (0.21 / n as f64).sqrt();
            assert!((point.mean_error - clt).abs() < 0.1 * clt, "N={n}: {} vs {clt}", point.mean_error);
            assert!((point.mean_error - exact).abs() < 4.0 * point.std_error);
        }
    }

    #[test]
    fn deviation_matches_binomial_tail() {
        let c = ExperimentConfig {
            epsilons: vec![0.05, 0.1, 0.15],
            ..bernoulli_config(0.5, RiskSpec::Avar { u: 0.0 }, vec![100], 4000)
        };
        let dev = deviation_curve(&c).unwrap();
        let pmf = binomial_pmf(100, 0.5);
        // |k/100 - 1/2| ≥ 1/10 exactly when k ≤ 40 or k ≥ 60
        let exact: f64 = pmf.iter().enumerate().filter(|(k, _)| *k <= 40 || *k >= 60).map(|(_, p)| p).sum();
        let p = dev.points[1];
        assert_eq!(p.epsilon, 0.1);
        let se = (exact * (1.0 - exact) / 4000.0).sqrt();
        assert!((p.p_hat - exact).abs() < 3.0 * se, "{} vs {exact}", p.p_hat);
        assert!(dev.points.windows(2).all(|w| w[1].p_hat <= w[0].p_hat));
    }

    #[test]
    fn shared_streams_between_reports() {
        let c = ExperimentConfig {
            epsilons: vec![0.02],
            ..bernoulli_config(0.3, RiskSpec::Avar { u: 0.5 }, vec![50, 200], 100)
        };
        let sim = simulate(&c).unwrap();
        assert_eq!(sim.rate_curve(), mean_error_curve(&c).unwrap());
        assert_eq!(sim.deviation_curve(&c.epsilons), deviation_curve(&c).unwrap());
        let cell = &sim.cells[0];
        let mean = cell.signed_errors.iter().map(|e| e.abs()).sum::<f64>() / 100.0;
        assert_eq!(mean, sim.rate_curve().points[0].mean_error);
        assert_eq!(bias_report(&c, 200).unwrap(), sim.bias()[1]);
    }

    #[test]
    fn results_independent_of_thread_count() {
        let c = bernoulli_config(0.3, RiskSpec::Oce { loss: LossFunction::avar(0.5).unwrap() }, vec![32, 64], 200);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&c).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn fit_rate_examples() {
        let curve = |pts: &[(usize, f64)]| RateCurve {
            points: pts
                .iter()
                .map(|&(n, e)| RatePoint { n, mean_error: e, std_error: 0.0 })
                .collect(),
        };
        let f = fit_rate(&curve(&[(100, 0.1), (400, 0.05), (1600, 0.025)])).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let f = fit_rate(&curve(&[(10, 1.0), (100, 1.0), (1000, 1.0)])).unwrap();
        assert_eq!(f.slope, 0.0);
        let f = fit_rate(&curve(&[(100, 0.2), (1000, 0.2 / 10f64.sqrt()), (10000, 0.02)])).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        assert!(matches!(
            fit_rate(&curve(&[(10, 0.0), (100, 1.0), (1000, 1.0)])),
            Err(Error::DegenerateCurve(_))
        ));
    }

    #[test]
    fn sharpness_curve_eps_one_matches_binomial_oracle() {
        // with eps = 1 the value is 2p − p², so the error is an explicit
        // function of the binomial count
        let n_grid = [8, 32];
        let curve = sharpness_curve(1.0, &n_grid, 4000, 9).unwrap();
        for (point, n) in curve.points.iter().zip(n_grid) {
            let p = 1.0 / n as f64;
            let rho = |a: f64| 2.0 * a - a * a;
            let exact = binomial_expectation(n, p, |a| (rho(a) - rho(p)).abs());
            assert!((point.mean_error - exact).abs() < 4.0 * point.std_error, "N={n}");
        }
    }

    #[test]
    fn config_validation() {
        let ok = bernoulli_config(0.3, RiskSpec::Avar { u: 0.5 }, vec![10, 20], 10);
        assert!(ok.validate().is_ok());
        assert!(ExperimentConfig { n_grid: vec![20, 10], ..ok.clone() }.validate().is_err());
        assert!(ExperimentConfig { n_grid: vec![1, 10], ..ok.clone() }.validate().is_err());
        assert!(ExperimentConfig { replications: 5, ..ok.clone() }.validate().is_err());
        assert!(ExperimentConfig { epsilons: vec![-1.0], ..ok.clone() }.validate().is_err());
        assert!(ExperimentConfig { options: vec![OptionPayoff::Centered], ..ok.clone() }.validate().is_err());
        assert!(bias_report(&ok, 10).is_err());
        assert!(sharpness_curve(0.5, &[2, 8], 100, 1).is_err());
        assert!(sharpness_curve(1.5, &[4, 8], 100, 1).is_err());
    }

    #[test]
    fn format_sig_rounds() {
        assert_eq!(format_sig(0.5, 12), "0.5");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(123456.7890123456, 5), "123460");
        assert_eq!(format_sig(0.0, 12), "0");
    }
}
