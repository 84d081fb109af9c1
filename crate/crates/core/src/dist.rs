//! Probability laws on the real line: construction, sampling, quantiles and
//! CSV ingestion of historical observations.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Tolerance on the total mass of a finite law.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finitely supported law in canonical form: atoms strictly ascending,
/// every weight positive, total mass 1 within [`WEIGHT_SUM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiscrete", into = "RawDiscrete")]
pub struct Discrete {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscrete {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawDiscrete> for Discrete {
    type Error = Error;

    fn try_from(raw: RawDiscrete) -> Result<Self> {
        Discrete::new(raw.atoms, raw.weights)
    }
}

impl From<Discrete> for RawDiscrete {
    fn from(d: Discrete) -> Self {
        RawDiscrete {
            atoms: d.atoms,
            weights: d.weights,
        }
    }
}

impl Discrete {
    /// Builds a law from parallel atom and weight lists. Atoms may come in
    /// any order and may repeat; they are sorted and merged, and zero-weight
    /// atoms are dropped.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::Parameter(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.is_empty() {
            return Err(Error::EmptyInput("finite law without atoms".into()));
        }
        if let Some(x) = atoms.iter().find(|x| !x.is_finite()) {
            return Err(Error::Parameter(format!("atom {x} is not finite")));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Parameter(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Parameter(format!("weights sum to {total}, not 1")));
        }
        let mut pairs: Vec<(f64, f64)> = atoms
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::from_sorted_pairs(pairs))
    }

    /// Equal-weight law of a sample; weights are `multiplicity / N`.
    pub fn from_sample(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("empty sample".into()));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::Parameter(format!("sample value {x} is not finite")));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let j = i + sorted[i..].iter().take_while(|x| **x == sorted[i]).count();
            atoms.push(sorted[i]);
            weights.push((j - i) as f64 / n);
            i = j;
        }
        Ok(Self { atoms, weights })
    }

    /// Point mass at `x`.
    pub fn point(x: f64) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    /// Two-point law on {0, 1} with success probability `p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        check_probability(p)?;
        Self::new(vec![0.0, 1.0], vec![1.0 - p, p])
    }

    // pairs sorted by atom; equal atoms are merged
    fn from_sorted_pairs(pairs: Vec<(f64, f64)>) -> Self {
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match atoms.last() {
                Some(last) if *last == x => *weights.last_mut().unwrap() += w,
                _ => {
                    atoms.push(x);
                    weights.push(w);
                }
            }
        }
        Self { atoms, weights }
    }

    /// Atoms in ascending order.
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    /// E[f(X)].
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    /// Law of f(X), re-canonicalized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| (f(*x), *w))
            .collect();
        if let Some((x, _)) = pairs.iter().find(|(x, _)| !x.is_finite()) {
            return Err(Error::Parameter(format!("mapped atom {x} is not finite")));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::from_sorted_pairs(pairs))
    }

    /// Law of X + c.
    pub fn shift(&self, c: f64) -> Result<Self> {
        self.map(|x| x + c)
    }

    /// Law of λX.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        self.map(|x| lambda * x)
    }

    /// Left-continuous generalized inverse of the CDF, with `quantile(0)`
    /// the smallest atom.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        let mut cumulative = 0.0;
        for (x, w) in self.atoms.iter().zip(&self.weights) {
            cumulative += w;
            if cumulative >= u {
                return Ok(*x);
            }
        }
        Ok(self.max())
    }
}

/// A probability law on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Distribution {
    Bernoulli { p: f64 },
    /// Density `q x^(-(q+1))` on `[1, ∞)`.
    #[serde(rename = "pareto")]
    ParetoTail { q: f64 },
    #[serde(rename = "discrete")]
    FiniteDiscrete(Discrete),
    Empirical { sample: Vec<f64> },
}

impl Distribution {
    pub fn bernoulli(p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Distribution::Bernoulli { p })
    }

    pub fn pareto(q: f64) -> Result<Self> {
        check_tail_index(q)?;
        Ok(Distribution::ParetoTail { q })
    }

    pub fn discrete(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Discrete::new(atoms, weights).map(Distribution::FiniteDiscrete)
    }

    /// Checks the parameter ranges of the variant.
    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Bernoulli { p } => check_probability(*p),
            Distribution::ParetoTail { q } => check_tail_index(*q),
            Distribution::FiniteDiscrete(_) => Ok(()),
            Distribution::Empirical { sample } => Discrete::from_sample(sample).map(|_| ()),
        }
    }

    /// The law as a finite discrete measure, if it has finite support.
    pub fn to_discrete(&self) -> Option<Result<Discrete>> {
        match self {
            Distribution::Bernoulli { p } => Some(Discrete::bernoulli(*p)),
            Distribution::ParetoTail { .. } => None,
            Distribution::FiniteDiscrete(d) => Some(Ok(d.clone())),
            Distribution::Empirical { sample } => Some(Discrete::from_sample(sample)),
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Distribution::ParetoTail { .. })
    }

    /// Mean of the law (infinite never occurs: Pareto requires q > 1).
    pub fn mean(&self) -> Result<f64> {
        match self {
            Distribution::ParetoTail { q } => {
                check_tail_index(*q)?;
                Ok(q / (q - 1.0))
            }
            other => other.to_discrete().unwrap().map(|d| d.mean()),
        }
    }

    /// Left-continuous generalized inverse CDF on `[0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        match self {
            Distribution::ParetoTail { q } => {
                check_tail_index(*q)?;
                Ok((1.0 - u).powf(-1.0 / q))
            }
            other => other.to_discrete().unwrap()?.quantile(u),
        }
    }

    /// One draw given a uniform variate on `[0, 1)`.
    fn draw(&self, discrete: Option<&Discrete>, uniform: f64) -> f64 {
        match self {
            Distribution::Bernoulli { p } => {
                if uniform < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::ParetoTail { q } => (1.0 - uniform).powf(-1.0 / q),
            Distribution::Empirical { sample } => {
                let i = ((uniform * sample.len() as f64) as usize).min(sample.len() - 1);
                sample[i]
            }
            Distribution::FiniteDiscrete(_) => {
                let d = discrete.expect("discrete law prepared by caller");
                let mut cumulative = 0.0;
                for (x, w) in d.atoms.iter().zip(&d.weights) {
                    cumulative += w;
                    if uniform < cumulative {
                        return *x;
                    }
                }
                d.max()
            }
        }
    }

    /// Short human-readable descriptor, e.g. `bernoulli(p=0.3)`.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Bernoulli { p } => write!(f, "bernoulli(p={p})"),
            Distribution::ParetoTail { q } => write!(f, "pareto(q={q})"),
            Distribution::FiniteDiscrete(d) => write!(f, "discrete({} atoms)", d.len()),
            Distribution::Empirical { sample } => write!(f, "empirical(N={})", sample.len()),
        }
    }
}

/// An i.i.d. sample together with the seed and law that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    pub values: Vec<f64>,
    pub source_seed: u64,
    pub meta: String,
}

impl SampleVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `n` i.i.d. draws from `dist` on stream 0 of `seed`.
pub fn sample(dist: &Distribution, n: usize, seed: u64) -> Result<SampleVector> {
    sample_stream(dist, n, seed, 0)
}

/// `n` i.i.d. draws from `dist` on the given stream of `seed`.
pub fn sample_stream(dist: &Distribution, n: usize, seed: u64, stream: u64) -> Result<SampleVector> {
    if n == 0 {
        return Err(Error::Parameter("sample size must be at least 1".into()));
    }
    dist.validate()?;
    let discrete = match dist {
        Distribution::FiniteDiscrete(d) => Some(d),
        _ => None,
    };
    let mut rng = stream_rng(seed, stream);
    let values = (0..n)
        .map(|_| dist.draw(discrete, rng.gen::<f64>()))
        .collect();
    Ok(SampleVector {
        values,
        source_seed: seed,
        meta: dist.descriptor(),
    })
}

/// The empirical measure of a sample: distinct values as atoms with
/// multiplicity / N weights.
pub fn empirical(sample: &SampleVector) -> Result<Distribution> {
    Discrete::from_sample(&sample.values).map(Distribution::FiniteDiscrete)
}

/// Column selector for [`load_samples`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl From<&str> for Column {
    fn from(s: &str) -> Self {
        Column::Name(s.to_owned())
    }
}

impl From<usize> for Column {
    fn from(i: usize) -> Self {
        Column::Index(i)
    }
}

/// Reads one column of a headed CSV file as a sample. Rows are numbered by
/// file line, the header being line 1.
pub fn load_samples(path: impl AsRef<Path>, column: &Column) -> Result<SampleVector> {
    let path = path.as_ref();
    let io_err = |e: &dyn fmt::Display| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| io_err(&e))?;
    let headers = reader.headers().map_err(|e| io_err(&e))?.clone();
    let index = match column {
        Column::Index(i) if *i < headers.len() => *i,
        Column::Index(i) => {
            return Err(Error::Schema(format!(
                "column index {i} out of range ({} columns)",
                headers.len()
            )))
        }
        Column::Name(name) => headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("no column named {name:?}")))?,
    };
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| io_err(&e))?;
        let row = record.position().map_or(values.len() + 2, |p| p.line() as usize);
        let cell = record.get(index).unwrap_or("").trim();
        match cell.parse::<f64>() {
            Ok(x) if x.is_finite() => values.push(x),
            _ => {
                return Err(Error::Parse {
                    row,
                    cell: cell.to_owned(),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no data rows", path.display())));
    }
    Ok(SampleVector {
        values,
        source_seed: 0,
        meta: format!("csv({})", path.display()),
    })
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain("p", p, "[0, 1]"))
    }
}

pub(crate) fn check_level(u: f64) -> Result<()> {
    if (0.0..1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::domain("u", u, "[0, 1)"))
    }
}

fn check_tail_index(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("q", q, "(1, ∞)"))
    }
}
