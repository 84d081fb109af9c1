//! Hedged risk `inf_{g ∈ 𝒢} ρ(F + g·G)` and expected-utility maximization
//! over finite scenario sets.
//!
//! The objective `g ↦ ρ(F + g·G)` is convex (a convex risk measure composed
//! with an affine map) but usually nonsmooth, so the optimizer is
//! derivative-free: a coarse lattice over 𝒢 picks the starting points, then
//! exact golden-section line searches along coordinate and pairwise
//! directions shrink a trust region until it is smaller than
//! `tol · (1 + diam 𝒢)`.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::{Discrete, WEIGHT_SUM_TOL};
use crate::error::{Error, Result};
use crate::risk::{root_bracket_and_bisect, RiskSpec};

/// Feasibility tolerance for returned strategies.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Lattice points per axis used to pick starting points in a box.
pub const LATTICE_POINTS_PER_AXIS: usize = 7;

const MAX_CYCLES: usize = 1000;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Finite weighted scenarios carrying the position payoff `f` and the net
/// option payoffs `G_j − p_j` (row-major, `e` per scenario).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    weights: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    e: usize,
}

impl ScenarioSet {
    /// `g_rows[i]` holds the `e` net option payoffs of scenario `i`.
    pub fn new(weights: Vec<f64>, f: Vec<f64>, g_rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::EmptyInput("scenario set without scenarios".into()));
        }
        if f.len() != n || g_rows.len() != n {
            return Err(Error::Parameter(format!(
                "{n} weights, {} payoffs and {} option rows",
                f.len(),
                g_rows.len()
            )));
        }
        let e = g_rows[0].len();
        if g_rows.iter().any(|row| row.len() != e) {
            return Err(Error::Parameter("option rows of unequal length".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Parameter("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Parameter(format!("weights sum to {total}, not 1")));
        }
        let g: Vec<f64> = g_rows.into_iter().flatten().collect();
        if f.iter().chain(&g).any(|x| !x.is_finite()) {
            return Err(Error::Parameter("payoffs must be finite".into()));
        }
        Ok(Self { weights, f, g, e })
    }

    /// Scenarios without traded options.
    pub fn unhedged(dist: &Discrete) -> Self {
        Self {
            weights: dist.weights().to_vec(),
            f: dist.atoms().to_vec(),
            g: Vec::new(),
            e: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of traded options.
    pub fn e(&self) -> usize {
        self.e
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g_row(&self, i: usize) -> &[f64] {
        &self.g[i * self.e..(i + 1) * self.e]
    }

    /// Same scenarios with `f` shifted by `c`.
    pub fn shift(&self, c: f64) -> Self {
        Self {
            f: self.f.iter().map(|x| x + c).collect(),
            ..self.clone()
        }
    }

    /// Payoff `F + g·G` in scenario `i`.
    pub fn payoff(&self, i: usize, g: &[f64]) -> f64 {
        self.f[i] + dot(g, self.g_row(i))
    }

    /// Law of `F + g·G` under the scenario weights.
    pub fn position(&self, g: &[f64]) -> Result<Discrete> {
        let atoms = (0..self.len()).map(|i| self.payoff(i, g)).collect();
        Discrete::new(atoms, self.weights.clone())
    }

    /// Largest `|g·G_i|` over feasible `g` and scenarios.
    fn reach(&self, set: &StrategySet) -> f64 {
        (0..self.len())
            .map(|i| set.max_abs_dot(self.g_row(i)))
            .fold(0.0, f64::max)
    }

    /// Reads `weight,f,g1..ge` CSV.
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Schema(e.to_string()))?
            .clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names.len() < 2 || names[0] != "weight" || names[1] != "f" {
            return Err(Error::Schema(format!(
                "scenario header must start with weight,f; got {names:?}"
            )));
        }
        for (j, name) in names[2..].iter().enumerate() {
            if *name != format!("g{}", j + 1) {
                return Err(Error::Schema(format!("expected column g{}, found {name}", j + 1)));
            }
        }
        let (mut weights, mut f, mut rows) = (Vec::new(), Vec::new(), Vec::new());
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Schema(e.to_string()))?;
            let row = record.position().map_or(0, |p| p.line() as usize);
            let cells = record
                .iter()
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::Parse {
                            row,
                            cell: c.to_owned(),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            if cells.len() != names.len() {
                return Err(Error::Schema(format!("row {row} has {} cells", cells.len())));
            }
            weights.push(cells[0]);
            f.push(cells[1]);
            rows.push(cells[2..].to_vec());
        }
        Self::new(weights, f, rows)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let io = |e: csv::Error| Error::Io {
            path: "<scenario csv>".into(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["weight".to_owned(), "f".to_owned()];
        header.extend((1..=self.e).map(|j| format!("g{j}")));
        w.write_record(&header).map_err(io)?;
        for i in 0..self.len() {
            let mut row = vec![self.weights[i].to_string(), self.f[i].to_string()];
            row.extend(self.g_row(i).iter().map(f64::to_string));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| io(e.into()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compact set of admissible trading strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StrategySet {
    Singleton { g: Vec<f64> },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{g ∈ [0,1]^e : Σ g_i = 1}`.
    Simplex { e: usize },
}

impl StrategySet {
    /// The set `{0}` in dimension `e`.
    pub fn zero(e: usize) -> Self {
        StrategySet::Singleton { g: vec![0.0; e] }
    }

    pub fn dim(&self) -> usize {
        match self {
            StrategySet::Singleton { g } => g.len(),
            StrategySet::Box { lo, .. } => lo.len(),
            StrategySet::Simplex { e } => *e,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StrategySet::Singleton { g } => {
                if g.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Parameter("singleton strategy must be finite".into()));
                }
            }
            StrategySet::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(Error::Parameter("box bounds of unequal length".into()));
                }
                for (l, h) in lo.iter().zip(hi) {
                    if !(l.is_finite() && h.is_finite()) {
                        return Err(Error::Parameter("box bounds must be finite".into()));
                    }
                    if l > h {
                        return Err(Error::Parameter(format!("box bound {l} > {h}")));
                    }
                }
            }
            StrategySet::Simplex { e } => {
                if *e == 0 {
                    return Err(Error::Parameter("simplex needs at least one coordinate".into()));
                }
            }
        }
        Ok(())
    }

    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            StrategySet::Singleton { .. } => 0.0,
            StrategySet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| (h - l).powi(2))
                .sum::<f64>()
                .sqrt(),
            StrategySet::Simplex { e } if *e > 1 => 2f64.sqrt(),
            StrategySet::Simplex { .. } => 0.0,
        }
    }

    pub fn contains(&self, g: &[f64], tol: f64) -> bool {
        if g.len() != self.dim() {
            return false;
        }
        match self {
            StrategySet::Singleton { g: s } => s.iter().zip(g).all(|(a, b)| (a - b).abs() <= tol),
            StrategySet::Box { lo, hi } => g
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (l, h))| *x >= l - tol && *x <= h + tol),
            StrategySet::Simplex { .. } => {
                g.iter().all(|x| *x >= -tol && *x <= 1.0 + tol)
                    && (g.iter().sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }

    fn max_abs_dot(&self, row: &[f64]) -> f64 {
        match self {
            StrategySet::Singleton { g } => dot(g, row).abs(),
            StrategySet::Box { lo, hi } => row
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(r, (l, h))| r.abs() * l.abs().max(h.abs()))
                .sum(),
            StrategySet::Simplex { .. } => row.iter().fold(0.0, |m, r| m.max(r.abs())),
        }
    }

    /// Starting lattice in lexicographic order: `points_per_axis` nodes per
    /// coordinate of a box, or the barycentric grid of resolution
    /// `points_per_axis − 1` on a simplex.
    pub fn lattice(&self, points_per_axis: usize) -> Vec<Vec<f64>> {
        let k = points_per_axis.max(2);
        match self {
            StrategySet::Singleton { g } => vec![g.clone()],
            StrategySet::Box { lo, hi } => {
                let axes: Vec<Vec<f64>> = lo
                    .iter()
                    .zip(hi)
                    .map(|(l, h)| {
                        if l == h {
                            vec![*l]
                        } else {
                            (0..k)
                                .map(|i| if i + 1 == k { *h } else { l + (h - l) * i as f64 / (k - 1) as f64 })
                                .collect()
                        }
                    })
                    .collect();
                axes.iter().fold(vec![Vec::new()], |acc, axis| {
                    acc.iter()
                        .flat_map(|prefix| {
                            axis.iter().map(move |x| {
                                let mut p = prefix.clone();
                                p.push(*x);
                                p
                            })
                        })
                        .collect()
                })
            }
            StrategySet::Simplex { e } => {
                let res = k - 1;
                let mut out = Vec::new();
                compositions(*e, res, &mut Vec::new(), &mut out);
                out.into_iter()
                    .map(|c| c.into_iter().map(|n| n as f64 / res as f64).collect())
                    .collect()
            }
        }
    }
}

// all ways to write `total` as an ordered sum of `parts` nonnegative integers
fn compositions(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        let mut c = prefix.clone();
        c.push(total);
        out.push(c);
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(parts - 1, total - first, prefix, out);
        prefix.pop();
    }
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeOptions {
    /// Number of best lattice points used as descent starts.
    pub restarts: usize,
    pub lattice_points: usize,
}

impl Default for HedgeOptions {
    fn default() -> Self {
        Self {
            restarts: 1,
            lattice_points: LATTICE_POINTS_PER_AXIS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeResult {
    pub value: f64,
    pub g_star: Vec<f64>,
    pub restarts_used: usize,
    /// Objective evaluations spent by the optimizer.
    pub inner_iterations: usize,
}

/// `π = inf_{g ∈ 𝒢} ρ(F + g·G)` with default optimizer settings.
pub fn hedged_risk(
    scenarios: &ScenarioSet,
    risk: &RiskSpec,
    strategies: &StrategySet,
    tol: f64,
) -> Result<HedgeResult> {
    hedged_risk_with(scenarios, risk, strategies, tol, HedgeOptions::default())
}

pub fn hedged_risk_with(
    scenarios: &ScenarioSet,
    risk: &RiskSpec,
    strategies: &StrategySet,
    tol: f64,
    options: HedgeOptions,
) -> Result<HedgeResult> {
    check_problem(scenarios, strategies, tol)?;
    risk.validate()?;
    if scenarios.e() == 0 {
        let value = risk.evaluate(&scenarios.position(&[])?, tol)?;
        return Ok(HedgeResult {
            value,
            g_star: Vec::new(),
            restarts_used: 0,
            inner_iterations: 1,
        });
    }
    if let RiskSpec::Shortfall { loss } = risk {
        return hedged_shortfall(scenarios, loss, strategies, tol, options);
    }
    let inner_tol = tol / 10.0;
    let objective = |g: &[f64]| risk.evaluate(&scenarios.position(g)?, inner_tol);
    minimize_convex(objective, strategies, tol, options)
}

// outer bisection on the capital m; J(m) = inf_g E l(F + g·G − m) is
// decreasing in m and the hedged shortfall is its crossing of level one
fn hedged_shortfall(
    scenarios: &ScenarioSet,
    loss: &crate::risk::LossFunction,
    strategies: &StrategySet,
    tol: f64,
    options: HedgeOptions,
) -> Result<HedgeResult> {
    let inner_tol = tol / 10.0;
    let mut evaluations = 0;
    let mut inner = |m: f64| {
        let expected_loss = |g: &[f64]| {
            Ok((0..scenarios.len())
                .map(|i| scenarios.weights[i] * loss.value(scenarios.payoff(i, g) - m))
                .sum())
        };
        let r = minimize_convex(expected_loss, strategies, inner_tol, options)?;
        evaluations += r.inner_iterations;
        Ok(r)
    };
    let reach = scenarios.reach(strategies);
    let f_min = scenarios.f.iter().copied().fold(f64::INFINITY, f64::min);
    let f_max = scenarios.f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (f_min - reach - 1.0, f_max + reach + 1.0);
    root_bracket_and_bisect(|m| inner(m).map(|r| r.value), &mut lo, &mut hi, tol)?;
    // capital hi is sufficient at the inner minimizer
    let at_hi = inner(hi)?;
    Ok(HedgeResult {
        value: 0.5 * (lo + hi),
        g_star: at_hi.g_star,
        restarts_used: at_hi.restarts_used,
        inner_iterations: evaluations,
    })
}

/// A concave nondecreasing utility.
#[derive(Clone)]
pub enum Utility {
    Linear,
    /// `U(x) = −exp(−a x)`.
    Exponential { a: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Utility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Utility::Linear => write!(f, "Linear"),
            Utility::Exponential { a } => write!(f, "Exponential {{ a: {a} }}"),
            Utility::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Utility {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Utility::Linear => x,
            Utility::Exponential { a } => -(-a * x).exp(),
            Utility::Custom(u) => u(x),
        }
    }

    /// Grid check of monotonicity and midpoint concavity on `[−10, 10]`.
    pub fn validate(&self) -> Result<()> {
        if let Utility::Exponential { a } = self {
            if !(*a > 0.0 && a.is_finite()) {
                return Err(Error::domain("a", *a, "(0, ∞)"));
            }
        }
        let grid: Vec<f64> = (0..=1000).map(|i| -10.0 + 0.02 * i as f64).collect();
        let v: Vec<f64> = grid.iter().map(|x| self.eval(*x)).collect();
        if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Contract("utility is not finite and nondecreasing".into()));
        }
        if v.windows(3).any(|w| w[1] < 0.5 * (w[0] + w[2]) - 1e-9 * w[1].abs().max(1.0)) {
            return Err(Error::Contract("utility is not concave".into()));
        }
        Ok(())
    }
}

/// `sup_{g ∈ 𝒢} Σ_i w_i U(f_i + g·G_i)`.
pub fn utility_max(
    scenarios: &ScenarioSet,
    utility: &Utility,
    strategies: &StrategySet,
    tol: f64,
) -> Result<HedgeResult> {
    utility_max_with(scenarios, utility, strategies, tol, HedgeOptions::default())
}

pub fn utility_max_with(
    scenarios: &ScenarioSet,
    utility: &Utility,
    strategies: &StrategySet,
    tol: f64,
    options: HedgeOptions,
) -> Result<HedgeResult> {
    check_problem(scenarios, strategies, tol)?;
    utility.validate()?;
    let negated = |g: &[f64]| {
        Ok(-(0..scenarios.len())
            .map(|i| scenarios.weights[i] * utility.eval(scenarios.payoff(i, g)))
            .sum::<f64>())
    };
    let mut r = if scenarios.e() == 0 {
        HedgeResult {
            value: negated(&[])?,
            g_star: Vec::new(),
            restarts_used: 0,
            inner_iterations: 1,
        }
    } else {
        minimize_convex(negated, strategies, tol, options)?
    };
    r.value = -r.value;
    Ok(r)
}

fn check_problem(scenarios: &ScenarioSet, strategies: &StrategySet, tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "(0, ∞)"));
    }
    strategies.validate()?;
    if scenarios.e() > 0 && strategies.dim() != scenarios.e() {
        return Err(Error::Parameter(format!(
            "{} options but a {}-dimensional strategy set",
            scenarios.e(),
            strategies.dim()
        )));
    }
    Ok(())
}

/// Derivative-free minimization of a convex function over a strategy set.
pub fn minimize_convex(
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
    set: &StrategySet,
    tol: f64,
    options: HedgeOptions,
) -> Result<HedgeResult> {
    let mut evaluations = 0usize;
    let mut eval = |g: &[f64]| {
        evaluations += 1;
        objective(g)
    };
    if let StrategySet::Singleton { g } = set {
        let value = eval(g)?;
        return Ok(HedgeResult {
            value,
            g_star: g.clone(),
            restarts_used: 0,
            inner_iterations: 1,
        });
    }

    let lattice = set.lattice(options.lattice_points);
    let mut scored = Vec::with_capacity(lattice.len());
    for (idx, g) in lattice.into_iter().enumerate() {
        let v = eval(&g)?;
        scored.push((v, idx, g));
    }
    // ties resolve to the lexicographically smallest lattice point
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let starts: Vec<(f64, Vec<f64>)> = scored
        .into_iter()
        .take(options.restarts.max(1))
        .map(|(v, _, g)| (v, g))
        .collect();

    let x_tol = tol * (1.0 + set.diameter());
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (v0, g0) in &starts {
        let (v, g) = descend(&mut eval, set, g0.clone(), *v0, x_tol)?;
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, g));
        }
    }
    let (value, g_star) = best.expect("at least one start");
    Ok(HedgeResult {
        value,
        g_star,
        restarts_used: starts.len(),
        inner_iterations: evaluations,
    })
}

// search directions: unit coordinates and pairwise diagonals for a box,
// pairwise exchanges for a simplex
fn directions(set: &StrategySet) -> Vec<Vec<(usize, f64)>> {
    let e = set.dim();
    let mut dirs = Vec::new();
    if let StrategySet::Box { .. } = set {
        dirs.extend((0..e).map(|i| vec![(i, 1.0)]));
    }
    for i in 0..e {
        for j in i + 1..e {
            match set {
                StrategySet::Simplex { .. } => dirs.push(vec![(i, 1.0), (j, -1.0)]),
                _ => {
                    dirs.push(vec![(i, 1.0), (j, 1.0)]);
                    dirs.push(vec![(i, 1.0), (j, -1.0)]);
                }
            }
        }
    }
    dirs
}

// feasible step range [t_lo, t_hi] along a direction
fn step_range(set: &StrategySet, g: &[f64], dir: &[(usize, f64)]) -> (f64, f64) {
    let (mut t_lo, mut t_hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for &(i, s) in dir {
        let (l, h) = match set {
            StrategySet::Box { lo, hi } => (lo[i], hi[i]),
            _ => (0.0, 1.0),
        };
        let (a, b) = ((l - g[i]) / s, (h - g[i]) / s);
        t_lo = t_lo.max(a.min(b));
        t_hi = t_hi.min(a.max(b));
    }
    (t_lo.min(0.0), t_hi.max(0.0))
}

fn descend(
    eval: &mut impl FnMut(&[f64]) -> Result<f64>,
    set: &StrategySet,
    mut g: Vec<f64>,
    mut value: f64,
    x_tol: f64,
) -> Result<(f64, Vec<f64>)> {
    let dirs = directions(set);
    let mut radius = set.diameter().max(x_tol);
    for _ in 0..MAX_CYCLES {
        let mut largest_step = 0.0f64;
        for dir in &dirs {
            let norm = (dir.len() as f64).sqrt();
            let (t_lo, t_hi) = step_range(set, &g, dir);
            let (a, b) = (t_lo.max(-radius / norm), t_hi.min(radius / norm));
            if b - a <= 0.0 {
                continue;
            }
            let moved = |t: f64| {
                let mut h = g.clone();
                for &(i, s) in dir {
                    h[i] += s * t;
                }
                clamp_into(set, &mut h);
                h
            };
            let (t, v) = golden_section(|t| eval(&moved(t)), a, b, x_tol / (10.0 * norm))?;
            if v < value {
                g = moved(t);
                value = v;
                largest_step = largest_step.max(t.abs() * norm);
            }
        }
        if largest_step < x_tol {
            return Ok((value, g));
        }
        radius = radius.min(2.0 * largest_step);
        if radius < x_tol {
            return Ok((value, g));
        }
    }
    Err(Error::IterationCap {
        best_value: value,
        certified: false,
    })
}

fn clamp_into(set: &StrategySet, g: &mut [f64]) {
    match set {
        StrategySet::Box { lo, hi } => {
            for (x, (l, h)) in g.iter_mut().zip(lo.iter().zip(hi)) {
                *x = x.clamp(*l, *h);
            }
        }
        StrategySet::Simplex { .. } => {
            for x in g.iter_mut() {
                *x = x.clamp(0.0, 1.0);
            }
        }
        StrategySet::Singleton { .. } => {}
    }
}

// golden-section search for the minimum of a unimodal function on [a, b];
// the endpoints and 0 are scored too so vertex optima are hit exactly
fn golden_section(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let mut best = (0.0, f(0.0)?);
    let consider = |t: f64, v: f64, best: &mut (f64, f64)| {
        if v < best.1 {
            *best = (t, v);
        }
    };
    let (fa, fb) = (f(a)?, f(b)?);
    consider(a, fa, &mut best);
    consider(b, fb, &mut best);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc <= fd {
            consider(c, fc, &mut best);
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            consider(d, fd, &mut best);
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    consider(c, fc, &mut best);
    consider(d, fd, &mut best);
    Ok(best)
}

/// Risk along a ray `t ↦ ρ(F + t·d·G)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub values: Vec<(f64, f64)>,
    pub diverging: bool,
}

/// Evaluates the risk along `t·direction` for `steps` geometric points
/// `t ∈ [1, t_max]`. The ray is flagged diverging when the risk drops by
/// more than one per decade over each of the last two decades.
pub fn unboundedness_probe(
    scenarios: &ScenarioSet,
    risk: &RiskSpec,
    direction: &[f64],
    t_max: f64,
    steps: usize,
) -> Result<ProbeReport> {
    risk.validate()?;
    if direction.len() != scenarios.e() {
        return Err(Error::Parameter(format!(
            "direction has {} coordinates, scenarios have {} options",
            direction.len(),
            scenarios.e()
        )));
    }
    let norm = dot(direction, direction).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!("direction has norm {norm}, not 1")));
    }
    if !(t_max >= 100.0 && t_max.is_finite()) {
        return Err(Error::domain("t_max", t_max, "[100, ∞)"));
    }
    if steps < 2 {
        return Err(Error::Parameter("probe needs at least two steps".into()));
    }
    let tol = crate::risk::DEFAULT_TOL;
    let at = |t: f64| {
        let g: Vec<f64> = direction.iter().map(|d| t * d).collect();
        risk.evaluate(&scenarios.position(&g)?, tol)
    };
    let values = (0..steps)
        .map(|k| {
            let t = if k + 1 == steps {
                t_max
            } else {
                t_max.powf(k as f64 / (steps - 1) as f64)
            };
            at(t).map(|v| (t, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let (v2, v1, v0) = (at(t_max / 100.0)?, at(t_max / 10.0)?, at(t_max)?);
    let diverging = v2 - v1 > 1.0 && v1 - v0 > 1.0;
    Ok(ProbeReport { values, diverging })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::grid_min;
    use crate::risk::{avar, LossFunction};

    fn coin_hedge() -> ScenarioSet {
        ScenarioSet::new(vec![0.5, 0.5], vec![0.0, 1.0], vec![vec![0.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn no_options_is_plain_risk() {
        let d = Discrete::new(vec![-1.0, 2.0, 5.0], vec![0.2, 0.5, 0.3]).unwrap();
        let s = ScenarioSet::unhedged(&d);
        let risk = RiskSpec::Avar { u: 0.6 };
        let r = hedged_risk(&s, &risk, &StrategySet::zero(0), 1e-9).unwrap();
        assert_eq!(r.value, avar(&d, 0.6).unwrap());

        let with_zero = ScenarioSet::new(
            d.weights().to_vec(),
            d.atoms().to_vec(),
            vec![vec![3.0]; 3],
        )
        .unwrap();
        let r = hedged_risk(&with_zero, &risk, &StrategySet::zero(1), 1e-9).unwrap();
        assert_eq!(r.value, avar(&d, 0.6).unwrap());
    }

    #[test]
    fn perfect_hedge() {
        let s = coin_hedge();
        let risk = RiskSpec::Avar { u: 0.5 };
        let set = StrategySet::Box {
            lo: vec![-1.0],
            hi: vec![1.0],
        };
        let objective = |g: f64| avar(&s.position(&[g]).unwrap(), 0.5).unwrap();
        let (g_grid, v_grid) = grid_min(objective, -1.0, 1.0, 20_001).unwrap();
        assert_eq!((g_grid, v_grid), (-1.0, 0.0));
        let r = hedged_risk(&s, &risk, &set, 1e-9).unwrap();
        assert!(r.value.abs() < 1e-9);
        assert!((r.g_star[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn cash_shift_passes_through() {
        let s = ScenarioSet::new(
            vec![0.25, 0.25, 0.5],
            vec![0.0, 2.0, 1.0],
            vec![vec![1.0, -0.5], vec![-1.0, 0.5], vec![0.2, 0.1]],
        )
        .unwrap();
        let set = StrategySet::Box {
            lo: vec![-1.0, -2.0],
            hi: vec![2.0, 1.0],
        };
        for risk in [
            RiskSpec::Avar { u: 0.7 },
            RiskSpec::Oce {
                loss: LossFunction::Exp,
            },
        ] {
            let base = hedged_risk(&s, &risk, &set, 1e-8).unwrap();
            let shifted = hedged_risk(&s.shift(0.7), &risk, &set, 1e-8).unwrap();
            assert!((shifted.value - base.value - 0.7).abs() < 1e-6, "{risk:?}");
            let at_star = risk
                .evaluate(&s.shift(0.7).position(&shifted.g_star).unwrap(), 1e-10)
                .unwrap();
            assert!((at_star - (base.value + 0.7)).abs() < 1e-6);
        }
    }

    #[test]
    fn shortfall_nesting_matches_plain_shortfall() {
        let d = Discrete::new(vec![-1.0, 0.5, 2.0], vec![0.3, 0.3, 0.4]).unwrap();
        let s = ScenarioSet::new(
            d.weights().to_vec(),
            d.atoms().to_vec(),
            vec![vec![1.0], vec![0.0], vec![-1.0]],
        )
        .unwrap();
        let loss = LossFunction::Exp;
        let risk = RiskSpec::Shortfall { loss };
        let r = hedged_risk(&s, &risk, &StrategySet::zero(1), 1e-9).unwrap();
        let plain = crate::risk::shortfall(&d, &loss, 1e-10).unwrap();
        assert!((r.value - plain).abs() < 1e-8);
    }

    #[test]
    fn hedged_shortfall_against_grid() {
        let s = coin_hedge();
        let loss = LossFunction::Exp;
        let risk = RiskSpec::Shortfall { loss };
        let set = StrategySet::Box {
            lo: vec![-2.0],
            hi: vec![0.5],
        };
        let r = hedged_risk(&s, &risk, &set, 1e-8).unwrap();
        let (_, grid) = grid_min(
            |g| crate::risk::shortfall(&s.position(&[g]).unwrap(), &loss, 1e-12).unwrap(),
            -2.0,
            0.5,
            25_001,
        )
        .unwrap();
        assert!((r.value - grid).abs() < 1e-6, "{} vs {grid}", r.value);
        assert!(set.contains(&r.g_star, FEASIBILITY_TOL));
    }

    #[test]
    fn simplex_concentrates_on_dominating_option() {
        // option 2 pays less than option 1 in every scenario
        let s = ScenarioSet::new(
            vec![0.5, 0.5],
            vec![1.0, 3.0],
            vec![vec![0.5, -1.0], vec![1.0, -0.5]],
        )
        .unwrap();
        let set = StrategySet::Simplex { e: 2 };
        let r = hedged_risk(&s, &RiskSpec::Avar { u: 0.5 }, &set, 1e-9).unwrap();
        assert!((r.g_star[1] - 1.0).abs() < 1e-9, "{:?}", r.g_star);
        assert!(set.contains(&r.g_star, FEASIBILITY_TOL));
    }

    #[test]
    fn simplex_lattice_is_barycentric() {
        let pts = StrategySet::Simplex { e: 3 }.lattice(7);
        assert_eq!(pts.len(), 28);
        assert!(pts.iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-12));
        assert_eq!(pts[0], vec![0.0, 0.0, 1.0]);
        assert_eq!(StrategySet::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] }.lattice(7).len(), 49);
    }

    #[test]
    fn utility_examples() {
        let s = ScenarioSet::new(
            vec![0.5, 0.5],
            vec![1.0, 2.0],
            vec![vec![0.4], vec![0.0]],
        )
        .unwrap();
        let unit = StrategySet::Box {
            lo: vec![0.0],
            hi: vec![1.0],
        };
        let r = utility_max(&s, &Utility::Linear, &unit, 1e-9).unwrap();
        assert_eq!(r.g_star, vec![1.0]);
        assert!((r.value - (1.5 + 0.2)).abs() < 1e-12);

        let s_neg = ScenarioSet::new(
            vec![0.5, 0.5],
            vec![1.0, 2.0],
            vec![vec![-0.6], vec![0.0]],
        )
        .unwrap();
        let r = utility_max(&s_neg, &Utility::Linear, &unit, 1e-9).unwrap();
        assert_eq!(r.g_star, vec![0.0]);
        assert!((r.value - 1.5).abs() < 1e-12);

        let expu = Utility::Exponential { a: 1.0 };
        let r = utility_max(&s, &expu, &StrategySet::zero(1), 1e-9).unwrap();
        assert_eq!(r.value, -(0.5 * (-1f64).exp() + 0.5 * (-2f64).exp()));
    }

    #[test]
    fn utility_contract() {
        let s = coin_hedge();
        let convex = Utility::Custom(Arc::new(|x: f64| x * x * x.signum()));
        assert!(matches!(
            utility_max(&s, &convex, &StrategySet::zero(1), 1e-9),
            Err(Error::Contract(_))
        ));
        let decreasing = Utility::Custom(Arc::new(|x: f64| -x));
        assert!(utility_max(&s, &decreasing, &StrategySet::zero(1), 1e-9).is_err());
    }

    #[test]
    fn probe_examples() {
        let one = ScenarioSet::new(vec![1.0], vec![0.0], vec![vec![-1.0]]).unwrap();
        let r = unboundedness_probe(&one, &RiskSpec::Avar { u: 0.0 }, &[1.0], 1e4, 9).unwrap();
        assert!(r.diverging);
        assert!(r.values.iter().all(|(t, v)| (v + t).abs() < 1e-9 * t));

        let two = ScenarioSet::new(vec![0.5, 0.5], vec![0.0, 0.0], vec![vec![-1.0], vec![-2.0]]).unwrap();
        let r = unboundedness_probe(&two, &RiskSpec::Avar { u: 0.5 }, &[1.0], 1e4, 9).unwrap();
        assert!(r.diverging);
        assert!(r.values.iter().all(|(t, v)| (v + t).abs() < 1e-9 * t));

        let sym = ScenarioSet::new(vec![0.5, 0.5], vec![0.0, 0.0], vec![vec![1.0], vec![-1.0]]).unwrap();
        let r = unboundedness_probe(&sym, &RiskSpec::Avar { u: 0.5 }, &[1.0], 1e4, 9).unwrap();
        assert!(!r.diverging);
        assert!(r.values.iter().all(|(t, v)| (v - t).abs() < 1e-9 * t));
    }

    #[test]
    fn probe_rejects_bad_input() {
        let one = ScenarioSet::new(vec![1.0], vec![0.0], vec![vec![-1.0]]).unwrap();
        let risk = RiskSpec::Avar { u: 0.0 };
        assert!(unboundedness_probe(&one, &risk, &[2.0], 1e4, 9).is_err());
        assert!(unboundedness_probe(&one, &risk, &[1.0], 10.0, 9).is_err());
        assert!(unboundedness_probe(&one, &risk, &[1.0, 0.0], 1e4, 9).is_err());
    }

    #[test]
    fn scenario_validation_and_csv() {
        assert!(ScenarioSet::new(vec![0.5], vec![0.0], vec![vec![]]).is_err());
        assert!(ScenarioSet::new(vec![0.5, 0.5], vec![0.0], vec![vec![], vec![]]).is_err());
        assert!(ScenarioSet::new(vec![0.5, 0.5], vec![0.0, 1.0], vec![vec![1.0], vec![]]).is_err());
        let s = ScenarioSet::new(
            vec![0.25, 0.75],
            vec![0.1, -2.0],
            vec![vec![1.0, 2.0], vec![-3.5, 0.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("weight,f,g1,g2\n"));
        assert_eq!(ScenarioSet::read_csv(&buf[..]).unwrap(), s);
        assert!(matches!(
            ScenarioSet::read_csv("weight,f,g2\n1,0,0\n".as_bytes()),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            ScenarioSet::read_csv("weight,f\n1,zz\n".as_bytes()),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn strategy_json_and_validation() {
        let b: StrategySet = serde_json::from_str(r#"{"kind":"box","lo":[-1],"hi":[1]}"#).unwrap();
        assert_eq!(b.dim(), 1);
        let s: StrategySet = serde_json::from_str(r#"{"kind":"simplex","e":3}"#).unwrap();
        assert_eq!(s, StrategySet::Simplex { e: 3 });
        let z: StrategySet = serde_json::from_str(r#"{"kind":"singleton","g":[0,0]}"#).unwrap();
        assert_eq!(z, StrategySet::zero(2));
        assert!(StrategySet::Box { lo: vec![1.0], hi: vec![0.0] }.validate().is_err());
        assert!(StrategySet::Box { lo: vec![f64::NEG_INFINITY], hi: vec![0.0] }.validate().is_err());
        let s = coin_hedge();
        assert!(hedged_risk(&s, &RiskSpec::Avar { u: 0.5 }, &StrategySet::zero(2), 1e-9).is_err());
        assert!(hedged_risk(&s, &RiskSpec::Avar { u: 0.5 }, &StrategySet::zero(1), 0.0).is_err());
    }
}
