//! Univariate zero-inflated discrete margins.
//!
//! A margin is always carried as a finite [`DiscretePmf`]. Infinite bases
//! (Poisson) are truncated at the first point where the base survival drops
//! below `eps`, and the residual tail is lumped onto that last point so that
//! cdf values below the truncation point stay exact.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default truncation threshold for infinite-support bases.
pub const DEFAULT_EPS: f64 = 1e-12;

const MASS_TOLERANCE: f64 = 1e-9;

/// Finite probability mass function on nonnegative integers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretePmf {
    support: Vec<u64>,
    probs: Vec<f64>,
    tail_eps: f64,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl DiscretePmf {
    /// Builds a pmf from parallel support and probability vectors.
    ///
    /// The support must be strictly increasing, probabilities nonnegative and
    /// summing to one within `1e-9`. Any residual is folded into the last
    /// point so the stored masses sum to one.
    pub fn new(support: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        Self::with_tail(support, probs, 0.0)
    }

    fn with_tail(support: Vec<u64>, mut probs: Vec<f64>, tail_eps: f64) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidInput("pmf has empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::InvalidInput(format!(
                "support has {} points but {} probabilities were given",
                support.len(),
                probs.len()
            )));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "pmf support must be strictly increasing".into(),
            ));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidInput(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        let last = probs.len() - 1;
        probs[last] = (probs[last] + (1.0 - total)).max(0.0);
        let cdf = cumulative(&probs);
        Ok(DiscretePmf {
            support,
            probs,
            tail_eps,
            cdf,
        })
    }

    /// Unit mass at `x`.
    pub fn point_mass(x: u64) -> Self {
        DiscretePmf {
            support: vec![x],
            probs: vec![1.0],
            tail_eps: 0.0,
            cdf: vec![1.0],
        }
    }

    /// Empirical pmf of a sequence of observations.
    pub fn empirical(values: &[u64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let n = sorted.len() as f64;
        let mut support = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for v in sorted {
            if support.last() == Some(&v) {
                *counts.last_mut().unwrap() += 1;
            } else {
                support.push(v);
                counts.push(1);
            }
        }
        let probs = counts.into_iter().map(|c| c as f64 / n).collect();
        Self::new(support, probs)
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mass that was lumped onto the last support point during truncation.
    pub fn tail_eps(&self) -> f64 {
        self.tail_eps
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Cumulative probabilities at each support point. The last entry is
    /// exactly 1 and no entry exceeds 1.
    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// `P(X <= x)`, with `cdf(x) = 0` below the support (so `F(-1) = 0`).
    pub fn cdf(&self, x: i64) -> f64 {
        if x < 0 {
            return 0.0;
        }
        let idx = self.support.partition_point(|&s| s <= x as u64);
        if idx == 0 {
            0.0
        } else {
            self.cdf[idx - 1]
        }
    }

    /// `P(X = x)`.
    pub fn pmf(&self, x: u64) -> f64 {
        match self.support.binary_search(&x) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// `P(X = 0)`.
    pub fn mass_at_zero(&self) -> f64 {
        self.pmf(0)
    }

    /// Generalized inverse: smallest support value with `cdf >= u`.
    pub fn quantile(&self, u: f64) -> u64 {
        let idx = self.cdf.partition_point(|&c| c < u);
        self.support[idx.min(self.support.len() - 1)]
    }

    /// Law of `X` conditioned on `X > 0`, or `None` when `P(X > 0) = 0`.
    pub fn positive_part(&self) -> Option<DiscretePmf> {
        let start = self.support.partition_point(|&s| s == 0);
        let mass: f64 = self.probs[start..].iter().sum();
        if mass <= 0.0 {
            return None;
        }
        let probs = self.probs[start..].iter().map(|p| p / mass).collect();
        DiscretePmf::new(self.support[start..].to_vec(), probs).ok()
    }

    /// Swaps in probabilities that are already known to be consistent.
    pub(crate) fn from_parts_unchecked(support: Vec<u64>, probs: Vec<f64>) -> Self {
        let cdf = cumulative(&probs);
        DiscretePmf {
            support,
            probs,
            tail_eps: 0.0,
            cdf,
        }
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc.min(1.0)
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

/// Base distribution of a zero-inflated margin.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseDistribution {
    Poisson { lambda: f64 },
    Explicit(DiscretePmf),
}

impl BaseDistribution {
    /// Probability the base assigns to zero.
    pub fn mass_at_zero(&self) -> f64 {
        match self {
            BaseDistribution::Poisson { lambda } => (-lambda).exp(),
            BaseDistribution::Explicit(pmf) => pmf.mass_at_zero(),
        }
    }
}

/// `p * delta_0 + (1 - p) * base`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroInflatedMarginSpec {
    pub inflation: f64,
    pub base: BaseDistribution,
}

impl ZeroInflatedMarginSpec {
    pub fn zip(lambda: f64, inflation: f64) -> Self {
        ZeroInflatedMarginSpec {
            inflation,
            base: BaseDistribution::Poisson { lambda },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.inflation) {
            return Err(Error::InvalidSpec(format!(
                "inflation p = {} outside [0, 1]",
                self.inflation
            )));
        }
        if let BaseDistribution::Poisson { lambda } = self.base {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "Poisson lambda = {lambda} must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// Materializes a zero-inflated margin, truncating infinite bases at `eps`.
pub fn build_margin(spec: &ZeroInflatedMarginSpec, eps: f64) -> Result<DiscretePmf> {
    spec.validate()?;
    if !(eps > 0.0 && eps < 1e-6) {
        return Err(Error::InvalidSpec(format!(
            "truncation eps = {eps} must lie in (0, 1e-6)"
        )));
    }
    let p = spec.inflation;
    if p == 1.0 {
        return Ok(DiscretePmf::point_mass(0));
    }
    let (support, base, tail) = match &spec.base {
        BaseDistribution::Poisson { lambda } => poisson_truncated(*lambda, eps),
        BaseDistribution::Explicit(pmf) => (pmf.support.clone(), pmf.probs.clone(), 0.0),
    };

    let mut support = support;
    let mut probs: Vec<f64> = base.iter().map(|b| (1.0 - p) * b).collect();
    if support[0] == 0 {
        probs[0] += p;
    } else if p > 0.0 {
        support.insert(0, 0);
        probs.insert(0, p);
    }
    let residual = 1.0 - probs.iter().sum::<f64>();
    let last = probs.len() - 1;
    probs[last] = (probs[last] + residual).max(0.0);
    DiscretePmf::with_tail(support, probs, (1.0 - p) * tail)
}

/// Poisson pmf on `0..=K`, with `K` the first point where the survival
/// function is at most `eps`. Returns support, lumped probabilities and the
/// lumped tail mass.
fn poisson_truncated(lambda: f64, eps: f64) -> (Vec<u64>, Vec<f64>, f64) {
    // exp(-lambda) underflows past ~745; switch to the log-space recurrence.
    let log_space = lambda > 700.0;
    let ln_lambda = lambda.ln();
    let mut ln_p = -lambda;
    let mut p = (-lambda).exp();
    let mut probs = Vec::new();
    let mut cumulative = 0.0;
    let mut k: u64 = 0;
    loop {
        let pk = if log_space { ln_p.exp() } else { p };
        probs.push(pk);
        cumulative += pk;
        // The second guard stops the log-space walk if rounding keeps the
        // accumulated mass just short of 1 - eps.
        if 1.0 - cumulative <= eps || (k as f64 > lambda && pk == 0.0) {
            break;
        }
        k += 1;
        if log_space {
            ln_p += ln_lambda - (k as f64).ln();
        } else {
            p *= lambda / k as f64;
        }
    }
    let tail = (1.0 - cumulative).max(0.0);
    let last = probs.len() - 1;
    probs[last] += 1.0 - cumulative;
    ((0..=k).collect(), probs, tail)
}

/// Margin argument of the command-line tools: `zip:lambda=<f>,p=<f>` or
/// `pmf:<path>` (CSV with columns `value,prob`).
#[derive(Debug, Clone, PartialEq)]
pub enum MarginSource {
    Zip { lambda: f64, inflation: f64 },
    PmfFile(PathBuf),
}

impl FromStr for MarginSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("pmf:") {
            if path.is_empty() {
                return Err(Error::InvalidSpec("pmf: requires a file path".into()));
            }
            return Ok(MarginSource::PmfFile(PathBuf::from(path)));
        }
        let Some(params) = s.strip_prefix("zip:") else {
            return Err(Error::InvalidSpec(format!(
                "unknown margin `{s}`; expected zip:lambda=<f>,p=<f> or pmf:<path>"
            )));
        };
        let mut lambda = None;
        let mut inflation = None;
        for kv in params.split(',') {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("malformed parameter `{kv}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("`{value}` is not a number")))?;
            match key.trim() {
                "lambda" => lambda = Some(value),
                "p" => inflation = Some(value),
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "unknown zip parameter `{other}`"
                    )))
                }
            }
        }
        match (lambda, inflation) {
            (Some(lambda), Some(inflation)) => Ok(MarginSource::Zip { lambda, inflation }),
            _ => Err(Error::InvalidSpec(
                "zip margin needs both lambda and p".into(),
            )),
        }
    }
}

impl fmt::Display for MarginSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarginSource::Zip { lambda, inflation } => {
                write!(f, "zip:lambda={lambda},p={inflation}")
            }
            MarginSource::PmfFile(p) => write!(f, "pmf:{}", p.display()),
        }
    }
}

impl MarginSource {
    pub fn to_spec(&self) -> Result<ZeroInflatedMarginSpec> {
        match self {
            MarginSource::Zip { lambda, inflation } => {
                Ok(ZeroInflatedMarginSpec::zip(*lambda, *inflation))
            }
            MarginSource::PmfFile(path) => Ok(ZeroInflatedMarginSpec {
                inflation: 0.0,
                base: BaseDistribution::Explicit(read_pmf_csv(path)?),
            }),
        }
    }

    pub fn build(&self, eps: f64) -> Result<DiscretePmf> {
        build_margin(&self.to_spec()?, eps)
    }
}

/// Reads a `value,prob` CSV. A header row is optional.
pub fn read_pmf_csv(path: &Path) -> Result<DiscretePmf> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows: Vec<(u64, f64)> = Vec::new();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Csv(format!(
                "line {}: expected 2 columns, found {}",
                line + 1,
                record.len()
            )));
        }
        let value = record[0].parse::<u64>();
        let prob = record[1].parse::<f64>();
        match (value, prob) {
            (Ok(v), Ok(p)) => rows.push((v, p)),
            _ if line == 0 => continue,
            _ => {
                return Err(Error::Csv(format!(
                    "line {}: expected `value,prob`, found `{},{}`",
                    line + 1,
                    &record[0],
                    &record[1]
                )))
            }
        }
    }
    rows.sort_by_key(|r| r.0);
    let (support, probs) = rows.into_iter().unzip();
    DiscretePmf::new(support, probs)
}
