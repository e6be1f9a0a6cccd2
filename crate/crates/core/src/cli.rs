//! Command-line front end. Every subcommand is a thin sequence of library
//! calls followed by serialization; numbers are printed with 12 significant
//! digits.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bounds::{bounds_closed_form, bounds_oracle, empirical_bounds, InflationHint};
use crate::copulas::{joint_pmf, CopulaSpec};
use crate::error::{Error, Result};
use crate::estimator::{estimate_rho_a, PairedSample};
use crate::exact::{decompose, rho_from_decomposition, spearman_exact};
use crate::margins::{BaseDistribution, MarginSource, DEFAULT_EPS};
use crate::output::round_json;
use crate::sim;

#[derive(Debug, Parser)]
#[command(
    name = "zirho",
    version,
    about = "Spearman's rho for zero-inflated count data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    #[value(name = "1")]
    One,
    #[value(name = "3")]
    Three,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact rho of two margins joined by a copula, with its decomposition.
    Exact {
        #[arg(long, value_parser = parse_margin)]
        margin_x: MarginSource,
        #[arg(long, value_parser = parse_margin)]
        margin_y: MarginSource,
        #[arg(long, value_parser = parse_copula)]
        copula: CopulaSpec,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Decomposition estimator from a CSV of `x,y` integer pairs.
    Estimate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Attainable bounds from margins, or estimated from data.
    Bounds {
        #[arg(long, value_parser = parse_margin, requires = "margin_y", conflicts_with = "input")]
        margin_x: Option<MarginSource>,
        #[arg(long, value_parser = parse_margin, requires = "margin_x", conflicts_with = "input")]
        margin_y: Option<MarginSource>,
        #[arg(long, required_unless_present = "margin_x")]
        input: Option<PathBuf>,
        /// Known inflation of x (requires --p2).
        #[arg(long, requires = "p2", requires = "input", conflicts_with = "base")]
        p1: Option<f64>,
        #[arg(long, requires = "p1", requires = "input")]
        p2: Option<f64>,
        /// Base family `poisson:lambda=<f>`; given once for both coordinates
        /// or twice (x then y).
        #[arg(long, value_parser = parse_base, num_args = 1, action = clap::ArgAction::Append, requires = "input")]
        base: Vec<BaseDistribution>,
        #[arg(long, value_enum, conflicts_with = "input")]
        method: Option<MethodArg>,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Monte Carlo reproduction of the simulation tables.
    Simulate {
        #[arg(
            long,
            value_enum,
            conflicts_with = "scenarios",
            required_unless_present = "scenarios"
        )]
        table: Option<Table>,
        /// CSV with columns lambda_f,lambda_g,p1,p2,alpha,n,reps.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Override the replication count of every scenario.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the sample size of every scenario.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write per-replication estimates in long format here.
        #[arg(long)]
        boxplot: Option<PathBuf>,
    },
}

fn parse_margin(s: &str) -> std::result::Result<MarginSource, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_copula(s: &str) -> std::result::Result<CopulaSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_base(s: &str) -> std::result::Result<BaseDistribution, String> {
    let lambda = s
        .strip_prefix("poisson:lambda=")
        .ok_or_else(|| format!("unknown base `{s}`; expected poisson:lambda=<f>"))?
        .parse::<f64>()
        .map_err(|_| format!("bad lambda in `{s}`"))?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(format!("lambda must be positive in `{s}`"));
    }
    Ok(BaseDistribution::Poisson { lambda })
}

/// Exit status and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, message: &str) -> Self {
        let line = message.lines().next().unwrap_or("error").trim().to_string();
        Outcome {
            code,
            stdout: String::new(),
            stderr: format!("{line}\n"),
        }
    }
}

/// Parses `argv` (including the program name) and executes it.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome::ok(e.to_string()),
                _ => Outcome::fail(2, &e.to_string()),
            };
        }
    };
    match execute(cli.command) {
        Ok(stdout) => Outcome::ok(stdout),
        Err(e) => {
            let code = match e {
                Error::Io { .. } | Error::InternalConsistency(_) => 1,
                _ => 2,
            };
            Outcome::fail(code, &format!("error: {e}"))
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("result types serialize")
}

fn render(mut v: Value) -> String {
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
    s.push('\n');
    s
}

fn execute(command: Command) -> Result<String> {
    match command {
        Command::Exact {
            margin_x,
            margin_y,
            copula,
            eps,
        } => {
            let f = margin_x.build(eps)?;
            let g = margin_y.build(eps)?;
            let j = joint_pmf(&f, &g, copula)?;
            let rho = spearman_exact(&j);
            let d = decompose(&j);
            Ok(render(json!({
                "rho_s": rho,
                "rho_s_identity": rho_from_decomposition(&d),
                "margin_x": margin_x.to_string(),
                "margin_y": margin_y.to_string(),
                "copula": copula.to_string(),
                "eps": eps,
                "support_sizes": [f.len(), g.len()],
                "decomposition": to_json(&d),
            })))
        }
        Command::Estimate { input } => {
            let s = PairedSample::from_csv_path(&input)?;
            let est = estimate_rho_a(&s)?;
            let mut v = to_json(&est);
            v["n"] = json!(s.len());
            Ok(render(v))
        }
        Command::Bounds {
            margin_x,
            margin_y,
            input,
            p1,
            p2,
            base,
            method,
            eps,
        } => {
            if let Some(path) = input {
                let s = PairedSample::from_csv_path(&path)?;
                let hint = match (p1, p2, base.as_slice()) {
                    (Some(p1), Some(p2), _) => {
                        for p in [p1, p2] {
                            if !(0.0..=1.0).contains(&p) {
                                return Err(Error::InvalidSpec(format!(
                                    "inflation {p} outside [0, 1]"
                                )));
                            }
                        }
                        InflationHint::Known { p1, p2 }
                    }
                    (_, _, []) => InflationHint::Unknown,
                    (_, _, [b]) => InflationHint::Base {
                        x: b.clone(),
                        y: b.clone(),
                    },
                    (_, _, [bx, by]) => InflationHint::Base {
                        x: bx.clone(),
                        y: by.clone(),
                    },
                    _ => {
                        return Err(Error::InvalidSpec(
                            "--base may be given at most twice".into(),
                        ))
                    }
                };
                return Ok(render(to_json(&empirical_bounds(&s, &hint)?)));
            }
            let (Some(mx), Some(my)) = (margin_x, margin_y) else {
                return Err(Error::InvalidSpec(
                    "either --input or both --margin-x and --margin-y are required".into(),
                ));
            };
            let f = mx.build(eps)?;
            let g = my.build(eps)?;
            let out = match method.unwrap_or(MethodArg::Both) {
                MethodArg::Closed => to_json(&bounds_closed_form(&f, &g)?),
                MethodArg::Oracle => to_json(&bounds_oracle(&f, &g)?),
                MethodArg::Both => {
                    let c = bounds_closed_form(&f, &g)?;
                    let o = bounds_oracle(&f, &g)?;
                    let diff = (c.rho_min - o.rho_min)
                        .abs()
                        .max((c.rho_max - o.rho_max).abs());
                    json!({
                        "closed_form": to_json(&c),
                        "oracle": to_json(&o),
                        "max_abs_difference": diff,
                    })
                }
            };
            Ok(render(out))
        }
        Command::Simulate {
            table,
            scenarios,
            seed,
            reps,
            n,
            threads,
            format,
            output,
            boxplot,
        } => {
            let mut configs = match (table, scenarios) {
                (Some(Table::One), _) => {
                    sim::table1_configs(seed, sim::DEFAULT_N, sim::DEFAULT_REPS)
                }
                (Some(Table::Three), _) => {
                    sim::table3_configs(seed, sim::DEFAULT_N, sim::DEFAULT_REPS)
                }
                (None, Some(path)) => sim::read_scenarios(&path, seed)?,
                (None, None) => {
                    return Err(Error::InvalidSpec(
                        "--table or --scenarios is required".into(),
                    ))
                }
            };
            for c in &mut configs {
                if let Some(r) = reps {
                    c.reps = r;
                }
                if let Some(n) = n {
                    c.n = n;
                }
            }
            let results = match threads {
                Some(0) => return Err(Error::InvalidSpec("--threads must be positive".into())),
                Some(k) => rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build()
                    .map_err(|e| Error::InvalidSpec(e.to_string()))?
                    .install(|| sim::run_all(&configs))?,
                None => sim::run_all(&configs)?,
            };
            if let Some(path) = boxplot {
                sim::export_boxplot_data(&results, &path)?;
            }
            let text = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    let written = if table == Some(Table::Three) {
                        sim::write_table3(&results, &mut buf)
                    } else {
                        sim::write_table1(&results, &mut buf)
                    };
                    written.expect("writing to a Vec cannot fail");
                    String::from_utf8(buf).expect("CSV output is ASCII")
                }
                Format::Json => render(Value::Array(
                    results
                        .iter()
                        .map(|r| {
                            json!({
                                "config": to_json(&r.config),
                                "true_rho": r.true_rho,
                                "est_mean": r.est_mean,
                                "mse_times_100": r.mse_times_100,
                                "bounds_true": [r.bounds_true.0, r.bounds_true.1],
                                "bounds_true_oracle": [r.bounds_true_oracle.0, r.bounds_true_oracle.1],
                                "bounds_est_mean": [r.bounds_est_mean.0, r.bounds_est_mean.1],
                                "degenerate_counts": to_json(&r.degenerate_counts),
                            })
                        })
                        .collect(),
                )),
            };
            match output {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|source| Error::Io { path, source })?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
    }
}
