//! Spearman's rho for bivariate zero-inflated count data.
//!
//! * [`margins`]: zero-inflated discrete margins (truncated Poisson or explicit pmf).
//! * [`copulas`]: Frechet-family, `M` and `W` copulas, joint pmf grids, sampling.
//! * [`exact`]: exact rho of a joint pmf and its zero-inflation decomposition.
//! * [`estimator`]: mid-rank Spearman and the decomposition plug-in estimator.
//! * [`bounds`]: attainable bounds (closed form, copula oracle, empirical).
//! * [`sim`]: reproducible Monte Carlo harness.
//! * [`cli`]: the `zirho` command-line front end.

pub mod bounds;
pub mod cli;
pub mod copulas;
pub mod error;
pub mod estimator;
pub mod exact;
pub mod margins;
pub mod output;
pub mod sim;

pub use bounds::{
    bounds_closed_form, bounds_closed_form_at, bounds_oracle, empirical_bounds, locate_points,
    rho11_extremes, BoundsMethod, BoundsResult, InflationHint, LocatedPoints,
};
pub use copulas::{copula_cdf, joint_pmf, sample_pairs, CopulaSpec, JointPmf};
pub use error::{Error, Result};
pub use estimator::{
    estimate_p_star_dagger, estimate_rho_a, estimate_rho_ab, mid_ranks, spearman_midrank,
    split_by_zero, EstimateResult, PairedSample,
};
pub use exact::{
    condition_positive, decompose, rho_from_decomposition, spearman_exact, DecompositionSummary,
};
pub use margins::{
    build_margin, BaseDistribution, DiscretePmf, ZeroInflatedMarginSpec, DEFAULT_EPS,
};
pub use sim::{run_scenario, ScenarioConfig, ScenarioResult};
