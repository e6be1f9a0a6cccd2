//! Deterministic Monte Carlo harness for the Poisson/Frechet scenarios.
//!
//! Every replication draws its sample from a ChaCha8 stream addressed by
//! `(master seed, scenario index, replication index)`, replications run on
//! the rayon pool, and all aggregation happens afterwards in replication
//! order. Output is therefore identical for any thread count.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bounds_closed_form, bounds_oracle, empirical_bounds, InflationHint};
use crate::copulas::{joint_pmf, sample_pairs, CopulaSpec};
use crate::error::{Error, Result};
use crate::estimator::estimate_rho_a;
use crate::exact::spearman_exact;
use crate::margins::{build_margin, BaseDistribution, ZeroInflatedMarginSpec, DEFAULT_EPS};
use crate::output::fmt_sig;

/// One simulation cell: two ZIP margins joined by a Frechet copula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub lambda_f: f64,
    pub lambda_g: f64,
    pub p1: f64,
    pub p2: f64,
    pub alpha: f64,
    pub n: usize,
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!(
                "sample size n = {} < 2",
                self.n
            )));
        }
        if self.reps < 1 {
            return Err(Error::InvalidSpec("reps must be at least 1".into()));
        }
        CopulaSpec::Frechet { alpha: self.alpha }.validate()?;
        self.margin_specs()
            .iter()
            .try_for_each(ZeroInflatedMarginSpec::validate)
    }

    fn margin_specs(&self) -> [ZeroInflatedMarginSpec; 2] {
        [
            ZeroInflatedMarginSpec::zip(self.lambda_f, self.p1),
            ZeroInflatedMarginSpec::zip(self.lambda_g, self.p2),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub true_rho: f64,
    pub est_mean: f64,
    pub mse_times_100: f64,
    pub per_rep_estimates: Vec<f64>,
    /// `(min, max)` from the closed form.
    pub bounds_true: (f64, f64),
    /// `(min, max)` from the M/W oracle.
    pub bounds_true_oracle: (f64, f64),
    pub bounds_est_mean: (f64, f64),
    pub per_rep_bounds: Vec<(f64, f64)>,
    /// How many replications defaulted each component to 0.
    pub degenerate_counts: BTreeMap<&'static str, usize>,
}

impl ScenarioResult {
    /// Mean absolute change when each estimate is clipped into its own
    /// estimated bounds.
    pub fn mean_clip_shift(&self) -> f64 {
        let total: f64 = self
            .per_rep_estimates
            .iter()
            .zip(&self.per_rep_bounds)
            .map(|(&e, &(lo, hi))| (e - e.clamp(lo, hi)).abs())
            .sum();
        total / self.per_rep_estimates.len() as f64
    }
}

/// Seed of replication `rep` of scenario `scenario`: word `2 * rep` of
/// ChaCha8 stream `scenario` under the master key.
pub fn replication_seed(master: u64, scenario: u64, rep: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(scenario);
    rng.set_word_pos(2 * rep as u128);
    rng.next_u64()
}

pub fn run_scenario(c: &ScenarioConfig) -> Result<ScenarioResult> {
    run_scenario_indexed(c, 0)
}

/// Runs one scenario; `scenario` selects the random stream family.
pub fn run_scenario_indexed(c: &ScenarioConfig, scenario: u64) -> Result<ScenarioResult> {
    c.validate()?;
    let [spec_f, spec_g] = c.margin_specs();
    let f = build_margin(&spec_f, DEFAULT_EPS)?;
    let g = build_margin(&spec_g, DEFAULT_EPS)?;
    let true_rho = spearman_exact(&joint_pmf(&f, &g, CopulaSpec::Frechet { alpha: c.alpha })?);
    let closed = bounds_closed_form(&f, &g)?;
    let oracle = bounds_oracle(&f, &g)?;
    let hint = InflationHint::Base {
        x: BaseDistribution::Poisson { lambda: c.lambda_f },
        y: BaseDistribution::Poisson { lambda: c.lambda_g },
    };

    let reps: Vec<(f64, (f64, f64), Vec<&'static str>)> = (0..c.reps as u64)
        .into_par_iter()
        .map(|r| {
            let sample = sample_pairs(&f, &g, c.alpha, c.n, replication_seed(c.seed, scenario, r))?;
            let est = estimate_rho_a(&sample)?;
            let b = empirical_bounds(&sample, &hint)?;
            Ok((est.rho_a, (b.rho_min, b.rho_max), est.degenerate_flags))
        })
        .collect::<Result<_>>()?;

    let count = reps.len() as f64;
    let mut degenerate_counts = BTreeMap::new();
    let (mut sum, mut sq, mut lo, mut hi) = (0.0, 0.0, 0.0, 0.0);
    for (est, (bmin, bmax), flags) in &reps {
        sum += est;
        sq += (est - true_rho).powi(2);
        lo += bmin;
        hi += bmax;
        for &flag in flags {
            *degenerate_counts.entry(flag).or_insert(0) += 1;
        }
    }
    Ok(ScenarioResult {
        config: *c,
        true_rho,
        est_mean: sum / count,
        mse_times_100: 100.0 * sq / count,
        per_rep_estimates: reps.iter().map(|r| r.0).collect(),
        bounds_true: (closed.rho_min, closed.rho_max),
        bounds_true_oracle: (oracle.rho_min, oracle.rho_max),
        bounds_est_mean: (lo / count, hi / count),
        per_rep_bounds: reps.iter().map(|r| r.1).collect(),
        degenerate_counts,
    })
}

const LAMBDA_PAIRS: [(f64, f64); 3] = [(2.0, 2.0), (2.0, 8.0), (8.0, 8.0)];
const INFLATIONS: [f64; 2] = [0.2, 0.8];
const ALPHAS: [f64; 3] = [0.2, 0.5, 0.8];

pub const DEFAULT_N: usize = 150;
pub const DEFAULT_REPS: usize = 1000;

/// The 18 estimator scenarios, in table order.
pub fn table1_configs(seed: u64, n: usize, reps: usize) -> Vec<ScenarioConfig> {
    let mut out = Vec::with_capacity(18);
    for (lambda_f, lambda_g) in LAMBDA_PAIRS {
        for p in INFLATIONS {
            for alpha in ALPHAS {
                out.push(ScenarioConfig {
                    lambda_f,
                    lambda_g,
                    p1: p,
                    p2: p,
                    alpha,
                    n,
                    reps,
                    seed,
                });
            }
        }
    }
    out
}

/// The 6 margin configurations of the bounds table. The copula parameter
/// does not affect the margins; 0.5 is used for sampling.
pub fn table3_configs(seed: u64, n: usize, reps: usize) -> Vec<ScenarioConfig> {
    let mut out = Vec::with_capacity(6);
    for (lambda_f, lambda_g) in LAMBDA_PAIRS {
        for p in INFLATIONS {
            out.push(ScenarioConfig {
                lambda_f,
                lambda_g,
                p1: p,
                p2: p,
                alpha: 0.5,
                n,
                reps,
                seed,
            });
        }
    }
    out
}

/// Runs a list of scenarios; scenario `i` uses stream family `i`.
pub fn run_all(configs: &[ScenarioConfig]) -> Result<Vec<ScenarioResult>> {
    configs
        .iter()
        .enumerate()
        .map(|(i, c)| run_scenario_indexed(c, i as u64))
        .collect()
}

pub fn reproduce_table1(seed: u64) -> Result<Vec<ScenarioResult>> {
    run_all(&table1_configs(seed, DEFAULT_N, DEFAULT_REPS))
}

pub fn reproduce_table3(seed: u64) -> Result<Vec<ScenarioResult>> {
    run_all(&table3_configs(seed, DEFAULT_N, DEFAULT_REPS))
}

pub const TABLE1_HEADER: &str =
    "scenario,lambda_f,lambda_g,p1,p2,alpha,n,reps,true_rho,mean_rho_a,mse_star,degenerate_reps";

pub fn write_table1<W: Write>(results: &[ScenarioResult], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{TABLE1_HEADER}")?;
    for (i, r) in results.iter().enumerate() {
        let c = &r.config;
        let degenerate = r.degenerate_counts.get("rho_s11").copied().unwrap_or(0);
        writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{},{},{},{degenerate}",
            fmt_sig(c.lambda_f),
            fmt_sig(c.lambda_g),
            fmt_sig(c.p1),
            fmt_sig(c.p2),
            fmt_sig(c.alpha),
            c.n,
            c.reps,
            fmt_sig(r.true_rho),
            fmt_sig(r.est_mean),
            fmt_sig(r.mse_times_100),
        )?;
    }
    Ok(())
}

pub const TABLE3_HEADER: &str = "scenario,lambda_f,lambda_g,p1,p2,n,reps,true_min_closed,true_max_closed,true_min_oracle,true_max_oracle,est_min_mean,est_max_mean";

pub fn write_table3<W: Write>(results: &[ScenarioResult], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{TABLE3_HEADER}")?;
    for (i, r) in results.iter().enumerate() {
        let c = &r.config;
        writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_sig(c.lambda_f),
            fmt_sig(c.lambda_g),
            fmt_sig(c.p1),
            fmt_sig(c.p2),
            c.n,
            c.reps,
            fmt_sig(r.bounds_true.0),
            fmt_sig(r.bounds_true.1),
            fmt_sig(r.bounds_true_oracle.0),
            fmt_sig(r.bounds_true_oracle.1),
            fmt_sig(r.bounds_est_mean.0),
            fmt_sig(r.bounds_est_mean.1),
        )?;
    }
    Ok(())
}

/// Long-format per-replication estimates: `scenario,rep,estimate,true_rho`.
pub fn write_boxplot_data<W: Write>(
    results: &[ScenarioResult],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "scenario,rep,estimate,true_rho")?;
    for (i, r) in results.iter().enumerate() {
        let truth = fmt_sig(r.true_rho);
        for (rep, e) in r.per_rep_estimates.iter().enumerate() {
            writeln!(out, "{i},{rep},{},{truth}", fmt_sig(*e))?;
        }
    }
    Ok(())
}

pub fn export_boxplot_data(results: &[ScenarioResult], path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    write_boxplot_data(results, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Reads a scenario file with columns
/// `lambda_f,lambda_g,p1,p2,alpha,n,reps`; every row gets `seed`.
pub fn read_scenarios(path: &Path, seed: u64) -> Result<Vec<ScenarioConfig>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    for row in rdr.deserialize::<ScenarioConfig>() {
        let mut c = row?;
        c.seed = seed;
        c.validate()?;
        out.push(c);
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("scenario file has no rows".into()));
    }
    Ok(out)
}
