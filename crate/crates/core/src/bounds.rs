//! Attainable bounds of Spearman's rho for zero-inflated count margins.
//!
//! The extremes are attained under the Frechet–Hoeffding copulas `M` and
//! `W`. [`bounds_oracle`] evaluates rho exactly under both couplings;
//! [`bounds_closed_form`] evaluates the explicit formulas in terms of the
//! margin cdfs at a handful of located points plus the extremes of rho on
//! the positive quadrant. The two must agree to rounding.
//!
//! In the formulas `p1 = F(0)` and `p2 = G(0)` are the total masses at zero.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::copulas::{joint_pmf, CopulaSpec};
use crate::error::{Error, Result};
use crate::estimator::PairedSample;
use crate::exact::{condition_positive, spearman_exact};
use crate::margins::{BaseDistribution, DiscretePmf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMethod {
    ClosedForm,
    Oracle,
    Empirical,
}

/// Named integer points used by the closed-form bounds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LocatedPoints {
    /// `F(s-1) <= p2 < F(s)`, used when `p1 <= p2`.
    pub s_tilde: Option<u64>,
    /// `G(u-1) < F(s) <= G(u)`.
    pub u_tilde: Option<u64>,
    /// `G(t-1) <= p1 < G(t)`, used when `p1 > p2`.
    pub t_tilde: Option<u64>,
    /// `F(v-1) < G(t) <= F(v)`.
    pub v_tilde: Option<u64>,
    /// `F(s'-1) <= 1 - p2 < F(s')`, lower bound with `p1 + p2 < 1`.
    pub s_prime: Option<u64>,
    /// `G(u'-1) <= 1 - F(s'-1) < G(u')`.
    pub u_prime: Option<u64>,
    /// `G(t'-1) <= 1 - p1 < G(t')`.
    pub t_prime: Option<u64>,
    /// `F(v'-1) <= 1 - G(t'-1) < F(v')`.
    pub v_prime: Option<u64>,
}

impl LocatedPoints {
    pub fn as_map(&self) -> BTreeMap<&'static str, u64> {
        [
            ("s_tilde", self.s_tilde),
            ("u_tilde", self.u_tilde),
            ("t_tilde", self.t_tilde),
            ("v_tilde", self.v_tilde),
            ("s_prime", self.s_prime),
            ("u_prime", self.u_prime),
            ("t_prime", self.t_prime),
            ("v_prime", self.v_prime),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

/// Inflation estimates reported alongside empirical bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InflationEstimate {
    pub p1: f64,
    pub p2: f64,
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsResult {
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_s11_max: f64,
    pub rho_s11_min: f64,
    pub located_points: LocatedPoints,
    pub case_tags: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i2: Option<f64>,
    pub method: BoundsMethod,
    /// `F(0)` and `G(0)`.
    pub zero_mass_x: f64,
    pub zero_mass_y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inflation: Option<InflationEstimate>,
    pub degenerate: Vec<&'static str>,
}

impl BoundsResult {
    fn trivial(f: &DiscretePmf, g: &DiscretePmf, method: BoundsMethod) -> Self {
        BoundsResult {
            rho_min: 0.0,
            rho_max: 0.0,
            rho_s11_max: 0.0,
            rho_s11_min: 0.0,
            located_points: LocatedPoints::default(),
            case_tags: vec!["constant margin"],
            i1: None,
            i2: None,
            method,
            zero_mass_x: f.cdf(0),
            zero_mass_y: g.cdf(0),
            inflation: None,
            degenerate: vec!["rho_s11_max", "rho_s11_min"],
        }
    }

    /// Clamps `value` into `[rho_min, rho_max]`.
    pub fn clip(&self, value: f64) -> f64 {
        value.clamp(self.rho_min, self.rho_max)
    }
}

/// `F(x - 1) <= target < F(x)`: the first support point whose cdf exceeds
/// `target`. `None` when `target >= 1`.
fn first_above(m: &DiscretePmf, target: f64) -> Option<u64> {
    let idx = m.cdf_values().partition_point(|&c| c <= target);
    m.support().get(idx).copied()
}

/// `G(u - 1) < target <= G(u)`: the first support point whose cdf reaches
/// `target`.
fn first_reaching(m: &DiscretePmf, target: f64) -> Option<u64> {
    let idx = m.cdf_values().partition_point(|&c| c < target);
    m.support().get(idx).copied()
}

fn top(m: &DiscretePmf) -> u64 {
    *m.support().last().expect("pmf support is nonempty")
}

/// A point that must exist whenever `target < 1`; at `target >= 1` the
/// corresponding conditional law is empty and the top of the support is
/// used (every term it enters is multiplied by a zero weight).
fn search_or_top(m: &DiscretePmf, target: f64, name: &'static str) -> Result<u64> {
    match first_above(m, target) {
        Some(x) => Ok(x),
        None if target >= 1.0 => Ok(top(m)),
        None => Err(Error::TruncationTooCoarse(name)),
    }
}

fn cdf_at(m: &DiscretePmf, x: u64) -> f64 {
    m.cdf(x as i64)
}

fn cdf_before(m: &DiscretePmf, x: u64) -> f64 {
    m.cdf(x as i64 - 1)
}

/// Locates the points entering the closed-form bounds. `p1`, `p2` are the
/// masses at zero of `f` and `g`.
pub fn locate_points(f: &DiscretePmf, g: &DiscretePmf, p1: f64, p2: f64) -> Result<LocatedPoints> {
    let mut pts = LocatedPoints::default();
    if p1 <= p2 {
        let s = first_above(f, p2).ok_or(Error::TruncationTooCoarse("s_tilde"))?;
        let u = first_reaching(g, cdf_at(f, s)).ok_or(Error::TruncationTooCoarse("u_tilde"))?;
        pts.s_tilde = Some(s);
        pts.u_tilde = Some(u);
    } else {
        let t = first_above(g, p1).ok_or(Error::TruncationTooCoarse("t_tilde"))?;
        let v = first_reaching(f, cdf_at(g, t)).ok_or(Error::TruncationTooCoarse("v_tilde"))?;
        pts.t_tilde = Some(t);
        pts.v_tilde = Some(v);
    }
    if p1 + p2 < 1.0 {
        let s = search_or_top(f, 1.0 - p2, "s_prime")?;
        let u = search_or_top(g, 1.0 - cdf_before(f, s), "u_prime")?;
        let t = search_or_top(g, 1.0 - p1, "t_prime")?;
        let v = search_or_top(f, 1.0 - cdf_before(g, t), "v_prime")?;
        pts.s_prime = Some(s);
        pts.u_prime = Some(u);
        pts.t_prime = Some(t);
        pts.v_prime = Some(v);
    }
    Ok(pts)
}

/// Extremes of rho on the positive quadrant, attained under `M` and `W`.
/// `None` marks a degenerate extreme (no positive-quadrant mass).
pub fn rho11_extremes(f: &DiscretePmf, g: &DiscretePmf) -> Result<(Option<f64>, Option<f64>)> {
    let extreme = |c: CopulaSpec| -> Result<Option<f64>> {
        let j = joint_pmf(f, g, c)?;
        Ok(condition_positive(&j).ok().map(|k| spearman_exact(&k)))
    };
    Ok((
        extreme(CopulaSpec::UpperBoundM)?,
        extreme(CopulaSpec::LowerBoundW)?,
    ))
}

fn is_constant(m: &DiscretePmf) -> bool {
    m.probs().iter().filter(|&&p| p > 0.0).count() <= 1
}

/// Bounds from the explicit formulas, with `p1`, `p2` the masses at zero.
pub fn bounds_closed_form(f: &DiscretePmf, g: &DiscretePmf) -> Result<BoundsResult> {
    bounds_closed_form_at(f, g, f.cdf(0), g.cdf(0))
}

/// The explicit formulas evaluated at given `p1`, `p2`. They are sharp only
/// when these equal the masses at zero of `f` and `g`.
pub fn bounds_closed_form_at(
    f: &DiscretePmf,
    g: &DiscretePmf,
    p1: f64,
    p2: f64,
) -> Result<BoundsResult> {
    if is_constant(f) || is_constant(g) {
        return Ok(BoundsResult::trivial(f, g, BoundsMethod::ClosedForm));
    }
    if p1 >= 1.0 || p2 >= 1.0 {
        return Ok(BoundsResult::trivial(f, g, BoundsMethod::ClosedForm));
    }
    let pts = locate_points(f, g, p1, p2)?;
    let (r11_max, r11_min) = rho11_extremes(f, g)?;
    let mut degenerate = Vec::new();
    let rho_s11_max = r11_max.unwrap_or_else(|| {
        degenerate.push("rho_s11_max");
        0.0
    });
    let rho_s11_min = r11_min.unwrap_or_else(|| {
        degenerate.push("rho_s11_min");
        0.0
    });
    let ff = |x: u64| cdf_at(f, x);
    let gg = |y: u64| cdf_at(g, y);
    let f_before = |x: u64| cdf_before(f, x);
    let g_before = |y: u64| cdf_before(g, y);

    let mut case_tags = Vec::new();
    let rho_max = if p1 <= p2 {
        case_tags.push("upper: p1 <= p2");
        let (s, u) = (pts.s_tilde.unwrap(), pts.u_tilde.unwrap());
        (1.0 - p2).powi(3) * rho_s11_max
            + 3.0 * p2 * (1.0 - p2)
            + 3.0 * (p2 - f_before(s)) * (ff(s) * (p2 - gg(u) - g_before(u)) + gg(u) * g_before(u))
    } else {
        case_tags.push("upper: p1 > p2");
        let (t, v) = (pts.t_tilde.unwrap(), pts.v_tilde.unwrap());
        (1.0 - p1).powi(3) * rho_s11_max
            + 3.0 * p1 * (1.0 - p1)
            + 3.0 * (p1 - g_before(t)) * (gg(t) * (p1 - ff(v) - f_before(v)) + ff(v) * f_before(v))
    };

    let (rho_min, i1, i2) = if p1 + p2 >= 1.0 {
        case_tags.push("lower: p1 + p2 >= 1");
        (-3.0 * (1.0 - p1) * (1.0 - p2), None, None)
    } else {
        case_tags.push("lower: p1 + p2 < 1");
        let s = pts.s_prime.unwrap();
        let u = pts.u_prime.unwrap();
        let t = pts.t_prime.unwrap();
        let v = pts.v_prime.unwrap();
        // w(x, y) = 1 - F(x) - G(y), with the cdfs already evaluated
        let w = |fx: f64, gy: f64| 1.0 - fx - gy;
        let w00 = w(p1, p2);
        let i1 = (1.0 - p2).min(ff(v));
        let i2 = (1.0 - p1).min(gg(u));
        let w_s0 = w(ff(s), p2);
        let w_0t = w(p1, gg(t));
        let joint_tie = if s == v {
            3.0 * w(f_before(s), g_before(t)) * w_s0 * w_0t
        } else {
            0.0
        };
        let x_part = p2 * w(f_before(s), p2)
            + (g_before(u) - p2).powi(2)
            + w(f_before(s), g_before(u)) * (i2 - 2.0 * p2 + g_before(u));
        let y_part = p1 * w(p1, g_before(t))
            + (f_before(v) - p1).powi(2)
            + w(f_before(v), g_before(t)) * (i1 - 2.0 * p1 + f_before(v));
        let value = w00.powi(3) * rho_s11_min + 3.0 * w00 * (p1 * p2 - p1 - p2) - 3.0 * p1 * p2
            + joint_tie
            - 3.0 * w_s0 * x_part
            - 3.0 * w_0t * y_part;
        (value, Some(i1), Some(i2))
    };

    Ok(BoundsResult {
        rho_min,
        rho_max,
        rho_s11_max,
        rho_s11_min,
        located_points: pts,
        case_tags,
        i1,
        i2,
        method: BoundsMethod::ClosedForm,
        zero_mass_x: p1,
        zero_mass_y: p2,
        inflation: None,
        degenerate,
    })
}

/// Bounds by exact evaluation of rho under `M` and `W`.
pub fn bounds_oracle(f: &DiscretePmf, g: &DiscretePmf) -> Result<BoundsResult> {
    if is_constant(f) || is_constant(g) {
        return Ok(BoundsResult::trivial(f, g, BoundsMethod::Oracle));
    }
    let rho_max = spearman_exact(&joint_pmf(f, g, CopulaSpec::UpperBoundM)?);
    let rho_min = spearman_exact(&joint_pmf(f, g, CopulaSpec::LowerBoundW)?);
    let (r11_max, r11_min) = rho11_extremes(f, g)?;
    let mut degenerate = Vec::new();
    if r11_max.is_none() {
        degenerate.push("rho_s11_max");
    }
    if r11_min.is_none() {
        degenerate.push("rho_s11_min");
    }
    let p1 = f.cdf(0);
    let p2 = g.cdf(0);
    Ok(BoundsResult {
        rho_min,
        rho_max,
        rho_s11_max: r11_max.unwrap_or(0.0),
        rho_s11_min: r11_min.unwrap_or(0.0),
        located_points: LocatedPoints::default(),
        case_tags: vec![if p1 + p2 >= 1.0 {
            "lower: p1 + p2 >= 1"
        } else {
            "lower: p1 + p2 < 1"
        }],
        i1: None,
        i2: None,
        method: BoundsMethod::Oracle,
        zero_mass_x: p1,
        zero_mass_y: p2,
        inflation: None,
        degenerate,
    })
}

/// What is known about the inflation of raw data.
#[derive(Debug, Clone, PartialEq)]
pub enum InflationHint {
    /// Inflation given directly.
    Known { p1: f64, p2: f64 },
    /// Base families known; `p = (m0 - b0) / (1 - b0)` from the observed
    /// zero mass `m0` and the base mass at zero `b0`.
    Base {
        x: BaseDistribution,
        y: BaseDistribution,
    },
    /// Nothing known; all observed zero mass is attributed to inflation.
    Unknown,
}

/// `(m0 - b0) / (1 - b0)` clipped to `[0, 1]`.
pub fn inflation_from_base(zero_mass: f64, base: &BaseDistribution) -> f64 {
    let b0 = base.mass_at_zero();
    if b0 >= 1.0 {
        return 0.0;
    }
    ((zero_mass - b0) / (1.0 - b0)).clamp(0.0, 1.0)
}

/// Plug-in bounds from the empirical margins of a sample.
pub fn empirical_bounds(s: &PairedSample, hint: &InflationHint) -> Result<BoundsResult> {
    if s.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: s.len(),
        });
    }
    let f = DiscretePmf::empirical(&s.xs())?;
    let g = DiscretePmf::empirical(&s.ys())?;
    let mut result = bounds_oracle(&f, &g)?;
    result.method = BoundsMethod::Empirical;
    let (m1, m2) = (f.mass_at_zero(), g.mass_at_zero());
    result.inflation = Some(match hint {
        InflationHint::Known { p1, p2 } => InflationEstimate {
            p1: *p1,
            p2: *p2,
            source: "given",
            caveat: None,
        },
        InflationHint::Base { x, y } => InflationEstimate {
            p1: inflation_from_base(m1, x),
            p2: inflation_from_base(m2, y),
            source: "parametric base",
            caveat: None,
        },
        InflationHint::Unknown => InflationEstimate {
            p1: m1,
            p2: m2,
            source: "empirical zero mass",
            caveat: Some(
                "inflation not identified without a base family; the whole observed mass at \
                 zero is reported as inflation"
                    .into(),
            ),
        },
    });
    Ok(result)
}
