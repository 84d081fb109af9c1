//! `riskrates`: estimate, hedge and run convergence experiments from JSON
//! configs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use riskrates::experiments::{
    fit_rate, sharpness_curve, simulate, write_bias_csv, ExperimentConfig, Objective, Simulation,
};
use riskrates::hedge::{hedged_risk_with, unboundedness_probe, utility_max_with, HedgeOptions, Utility};
use riskrates::rng::DEFAULT_SEED;
use riskrates::{oracle, StrategySet};
use serde::Serialize;
use serde_json::json;

use config::{EstimateConfig, ExperimentFile, HedgeConfig, ProbeConfig, SharpnessConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] riskrates::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "riskrates", version, about = "Law-invariant risk estimation and convergence experiments")]
struct Cli {
    /// JSON config (not used by `oracle`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "RISKRATES_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory for CSV and JSON reports; created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Risk of a distribution or CSV sample.
    Estimate,
    /// Hedged risk or maximal expected utility of a scenario set.
    Hedge,
    /// Mean absolute error against N, with a log-log rate fit.
    Rate,
    /// Empirical exceedance probabilities P(|error| ≥ ε).
    Deviation,
    /// Mean signed error at each N.
    Bias,
    /// Sharpness-risk errors along the drifting Bernoulli(1/N) family.
    Sharpness,
    /// Risk of t·direction hedges for growing t.
    ProbeUnbounded,
    /// Closed-form reference values: avar_bernoulli P U, avar_pareto Q U,
    /// sharpness_two_point A EPS, dyadic_sum A B X [N_MAX].
    Oracle {
        name: String,
        #[arg(allow_negative_numbers = true)]
        args: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("riskrates: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        // an already-initialized pool only happens in tests; the hint is harmless to drop
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match &cli.command {
        Command::Estimate => estimate(cli),
        Command::Hedge => hedge(cli),
        Command::Rate => rate(cli),
        Command::Deviation => deviation(cli),
        Command::Bias => bias(cli),
        Command::Sharpness => sharpness(cli),
        Command::ProbeUnbounded => probe(cli),
        Command::Oracle { name, args } => oracle_cmd(name, args),
    }
}

fn config_path(cli: &Cli) -> CliResult<&Path> {
    cli.config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))
}

struct Output(Option<PathBuf>);

impl Output {
    fn new(cli: &Cli) -> CliResult<Self> {
        if let Some(dir) = &cli.out {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        }
        Ok(Output(cli.out.clone()))
    }

    fn write(&self, name: &str, contents: &[u8]) -> CliResult<()> {
        let Some(dir) = &self.0 else { return Ok(()) };
        let path = dir.join(name);
        let mut file = fs::File::create(&path)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        file.write_all(contents)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }

    fn json(&self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn csv(&self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> riskrates::Result<()>) -> CliResult<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }
}

fn estimate(cli: &Cli) -> CliResult<()> {
    let path = config_path(cli)?;
    let cfg: EstimateConfig = config::read(path)?;
    cfg.risk.validate()?;
    let (law, sampled) = cfg.load_input(path, cli.seed)?;
    let value = cfg.risk.evaluate(&law, cfg.tol)?;
    println!("{value}");
    Output::new(cli)?.json(
        "estimate.json",
        &json!({
            "risk_spec": cfg.risk,
            "input": cfg.input,
            "value": value,
            "solver_stats": {
                "atoms": law.len(),
                "tol": cfg.tol,
                "sampled": sampled,
                "seed": sampled.then_some(cli.seed),
            },
        }),
    )
}

fn hedge(cli: &Cli) -> CliResult<()> {
    let path = config_path(cli)?;
    let cfg: HedgeConfig = config::read(path)?;
    let scenarios = cfg.scenarios.load(path)?;
    let strategies = cfg.strategies.clone().unwrap_or_else(|| StrategySet::zero(scenarios.e()));
    let options = HedgeOptions {
        restarts: cfg.restarts,
        ..HedgeOptions::default()
    };
    let result = match &cfg.objective {
        Objective::Risk(r) => hedged_risk_with(&scenarios, r, &strategies, cfg.tol, options)?,
        Objective::Utility(u) => utility_max_with(&scenarios, &Utility::from(*u), &strategies, cfg.tol, options)?,
    };
    println!("{}", result.value);
    Output::new(cli)?.json(
        "hedge.json",
        &json!({
            "objective": cfg.objective,
            "strategies": strategies,
            "scenarios": scenarios.len(),
            "value": result.value,
            "g_star": result.g_star,
            "solver_stats": {
                "restarts_used": result.restarts_used,
                "inner_iterations": result.inner_iterations,
                "tol": cfg.tol,
            },
        }),
    )
}

fn experiment(cli: &Cli) -> CliResult<ExperimentConfig> {
    let file: ExperimentFile = config::read(config_path(cli)?)?;
    let config = file.into_config(cli.seed);
    config.validate()?;
    Ok(config)
}

fn summary(command: &str, config: &ExperimentConfig, sim: &Simulation, extra: serde_json::Value) -> serde_json::Value {
    json!({
        "command": command,
        "config": config,
        "truth": sim.truth,
        "approximate_truth": sim.truth.approximate,
        "results": extra,
    })
}

fn rate(cli: &Cli) -> CliResult<()> {
    let config = experiment(cli)?;
    let out = Output::new(cli)?;
    let sim = simulate(&config)?;
    let curve = sim.rate_curve();
    out.csv("rate.csv", |w| curve.write_csv(w))?;
    let fit = fit_rate(&curve);
    let fit_json = match &fit {
        Ok(f) => json!(f),
        Err(e) => json!({ "error": e.to_string() }),
    };
    out.json("rate_fit.json", &fit_json)?;
    out.json("summary.json", &summary("rate", &config, &sim, json!({ "fit": fit_json })))?;
    let fit = fit?;
    println!("slope {} r_squared {}", fit.slope, fit.r_squared);
    Ok(())
}

fn deviation(cli: &Cli) -> CliResult<()> {
    let config = experiment(cli)?;
    if config.epsilons.is_empty() {
        return Err(CliError::Config("deviation needs a nonempty \"epsilons\" list".into()));
    }
    let out = Output::new(cli)?;
    let sim = simulate(&config)?;
    let curve = sim.deviation_curve(&config.epsilons);
    out.csv("deviation.csv", |w| curve.write_csv(w))?;
    out.json("summary.json", &summary("deviation", &config, &sim, json!(curve.points)))?;
    for p in &curve.points {
        println!("N {} epsilon {} p_hat {}", p.n, p.epsilon, p.p_hat);
    }
    Ok(())
}

fn bias(cli: &Cli) -> CliResult<()> {
    let config = experiment(cli)?;
    if config.replications < 100 {
        return Err(CliError::Config("bias needs at least 100 replications".into()));
    }
    let out = Output::new(cli)?;
    let sim = simulate(&config)?;
    let reports = sim.bias();
    out.csv("bias.csv", |w| write_bias_csv(&reports, w))?;
    out.json("summary.json", &summary("bias", &config, &sim, json!(reports)))?;
    for b in &reports {
        println!("N {} mean_signed_error {} std_error {}", b.n, b.mean_signed_error, b.std_error);
    }
    Ok(())
}

fn sharpness(cli: &Cli) -> CliResult<()> {
    let cfg: SharpnessConfig = config::read(config_path(cli)?)?;
    let out = Output::new(cli)?;
    let curve = sharpness_curve(cfg.eps, &cfg.n_grid, cfg.replications, cli.seed)?;
    out.csv("sharpness.csv", |w| curve.write_csv(w))?;
    let fit = fit_rate(&curve);
    let fit_json = match &fit {
        Ok(f) => json!(f),
        Err(e) => json!({ "error": e.to_string() }),
    };
    // mean_error·N^ε at each N; the lower bound says these stay away from 0
    let constants: Vec<_> = curve
        .points
        .iter()
        .map(|p| json!({ "N": p.n, "scaled_error": p.mean_error * (p.n as f64).powf(cfg.eps) }))
        .collect();
    out.json("rate_fit.json", &fit_json)?;
    out.json(
        "summary.json",
        &json!({
            "command": "sharpness",
            "config": cfg,
            "seed": cli.seed,
            "approximate_truth": false,
            "results": { "fit": fit_json, "scaled_errors": constants },
        }),
    )?;
    let fit = fit?;
    println!("slope {} r_squared {}", fit.slope, fit.r_squared);
    Ok(())
}

fn probe(cli: &Cli) -> CliResult<()> {
    let path = config_path(cli)?;
    let cfg: ProbeConfig = config::read(path)?;
    let scenarios = cfg.scenarios.load(path)?;
    let report = unboundedness_probe(&scenarios, &cfg.risk, &cfg.direction, cfg.t_max, cfg.steps)?;
    println!("diverging {}", report.diverging);
    let values: Vec<_> = report.values.iter().map(|(t, v)| json!({ "t": t, "value": v })).collect();
    Output::new(cli)?.json(
        "probe.json",
        &json!({
            "risk": cfg.risk,
            "direction": cfg.direction,
            "diverging": report.diverging,
            "values": values,
        }),
    )
}

fn oracle_cmd(name: &str, args: &[f64]) -> CliResult<()> {
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(CliError::Config(format!("{name} takes {n} arguments, got {}", args.len())))
        }
    };
    let value = match name {
        "avar_bernoulli" => {
            arity(2)?;
            oracle::avar_bernoulli(args[0], args[1])?
        }
        "avar_pareto" => {
            arity(2)?;
            oracle::avar_pareto(args[0], args[1])?
        }
        "sharpness_two_point" => {
            arity(2)?;
            oracle::sharpness_two_point(args[0], args[1])?
        }
        "dyadic_sum" => {
            let n_max = match args.len() {
                3 => oracle::DYADIC_TERMS,
                4 if args[3] >= 1.0 && args[3].fract() == 0.0 => args[3] as usize,
                4 => return Err(CliError::Config("n_max must be a positive integer".into())),
                _ => arity(3).map(|_| 0)?,
            };
            oracle::dyadic_sum(args[0], args[1], args[2], n_max)?
        }
        _ => {
            return Err(CliError::Config(format!(
                "unknown oracle {name:?}; expected avar_bernoulli, avar_pareto, sharpness_two_point or dyadic_sum"
            )))
        }
    };
    println!("{value}");
    Ok(())
}
