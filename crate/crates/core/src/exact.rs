//! Population-level Spearman's rho on a finite joint pmf.
//!
//! `spearman_exact` evaluates the three-copy concordance definition directly
//! from the joint masses and the margin cdfs. `decompose` computes every
//! ingredient of the zero-inflation identity (quadrant masses, conditional
//! positive-part laws, cross tie/exceedance probabilities, conditional
//! rhos) and `rho_from_decomposition` reassembles rho from them.

use serde::Serialize;

use crate::copulas::JointPmf;
use crate::error::{Error, Result};
use crate::margins::DiscretePmf;

/// `3 (P_c - P_d)` with `X2 ~ F`, `Y3 ~ G` independent of `(X1, Y1) ~ J`.
///
/// Per cell, `P(X2 < x) - P(X2 > x) = F(x-1) + F(x) - 1`, so the
/// concordance minus discordance probability factorizes into a single
/// weighted sum over the grid.
pub fn spearman_exact(j: &JointPmf) -> f64 {
    let sx = sign_scores(j.x_margin());
    let sy = sign_scores(j.y_margin());
    3.0 * weighted_sign_sum(j, &sx, &sy)
}

/// `P(L < x) - P(L > x)` at every support point of `law`.
fn sign_scores(law: &DiscretePmf) -> Vec<f64> {
    let cdf = law.cdf_values();
    (0..cdf.len())
        .map(|i| {
            let below = if i == 0 { 0.0 } else { cdf[i - 1] };
            below - (1.0 - cdf[i])
        })
        .collect()
}

/// Same as [`sign_scores`] but evaluated at arbitrary points.
fn sign_scores_at(law: &DiscretePmf, points: &[u64]) -> Vec<f64> {
    points
        .iter()
        .map(|&x| law.cdf(x as i64 - 1) - (1.0 - law.cdf(x as i64)))
        .collect()
}

fn weighted_sign_sum(j: &JointPmf, sx: &[f64], sy: &[f64]) -> f64 {
    let ny = j.ny();
    j.masses()
        .chunks_exact(ny)
        .zip(sx)
        .map(|(row, &a)| a * row.iter().zip(sy).map(|(m, b)| m * b).sum::<f64>())
        .sum()
}

/// Every quantity that enters the zero-inflation identity for rho.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    /// Law of `X` given `X > 0, Y = 0`.
    #[serde(skip)]
    pub x10: Option<DiscretePmf>,
    /// Law of `X` given `X > 0, Y > 0`.
    #[serde(skip)]
    pub x11: Option<DiscretePmf>,
    /// Law of `Y` given `X = 0, Y > 0`.
    #[serde(skip)]
    pub y01: Option<DiscretePmf>,
    /// Law of `Y` given `X > 0, Y > 0`.
    #[serde(skip)]
    pub y11: Option<DiscretePmf>,
    pub p1_star: f64,
    pub p1_dagger: f64,
    pub p2_star: f64,
    pub p2_dagger: f64,
    pub rho_s11: f64,
    pub rho_s10: f64,
    pub rho_s01: f64,
    pub rho_s00: f64,
    pub rho_s_star: f64,
    /// Components that were set to 0 because their conditioning event has
    /// probability zero (their weight in the identity is then zero too).
    pub degenerate: Vec<&'static str>,
}

impl DecompositionSummary {
    /// Assembles a summary from its scalar parts, computing `rho_s_star`.
    pub fn from_components(
        quadrants: [f64; 4],
        p_star_dagger: [f64; 4],
        rhos: [f64; 4],
        degenerate: Vec<&'static str>,
    ) -> Self {
        let [p00, p01, p10, p11] = quadrants;
        let [p1_star, p1_dagger, p2_star, p2_dagger] = p_star_dagger;
        let [rho_s11, rho_s10, rho_s01, rho_s00] = rhos;
        let rho_s_star =
            p11 * p11 * rho_s11 + p11 * p10 * rho_s10 + p11 * p01 * rho_s01 + p01 * p10 * rho_s00;
        DecompositionSummary {
            p00,
            p01,
            p10,
            p11,
            x10: None,
            x11: None,
            y01: None,
            y11: None,
            p1_star,
            p1_dagger,
            p2_star,
            p2_dagger,
            rho_s11,
            rho_s10,
            rho_s01,
            rho_s00,
            rho_s_star,
            degenerate,
        }
    }

    pub fn is_degenerate(&self, component: &str) -> bool {
        self.degenerate.contains(&component)
    }
}

/// Positive-part law of one coordinate, restricted to cells selected by the
/// other coordinate. `None` when the selection has no mass.
fn conditional_positive(values: &[u64], weights: &[f64]) -> Option<DiscretePmf> {
    let mut support = Vec::new();
    let mut probs = Vec::new();
    for (&v, &w) in values.iter().zip(weights) {
        if v > 0 {
            support.push(v);
            probs.push(w);
        }
    }
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return None;
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Some(DiscretePmf::from_parts_unchecked(support, probs))
}

/// `(P(A > B), P(A = B))` for independent `A`, `B`, by double summation.
fn exceed_and_tie(a: &DiscretePmf, b: &DiscretePmf) -> (f64, f64) {
    let mut greater = 0.0;
    let mut tie = 0.0;
    for (&xa, &pa) in a.support().iter().zip(a.probs()) {
        for (&xb, &pb) in b.support().iter().zip(b.probs()) {
            if xa > xb {
                greater += pa * pb;
            } else if xa == xb {
                tie += pa * pb;
            }
        }
    }
    (greater, tie)
}

/// Computes every ingredient of the zero-inflation identity for `j`.
pub fn decompose(j: &JointPmf) -> DecompositionSummary {
    let xs = j.x_support();
    let ys = j.y_support();
    let (nx, ny) = (j.nx(), j.ny());

    let (mut p00, mut p01, mut p10, mut p11) = (0.0, 0.0, 0.0, 0.0);
    // row weights for X given Y = 0 / Y > 0; column weights likewise
    let mut x_given_y0 = vec![0.0; nx];
    let mut x_given_ypos = vec![0.0; nx];
    let mut y_given_x0 = vec![0.0; ny];
    let mut y_given_xpos = vec![0.0; ny];
    for i in 0..nx {
        for jj in 0..ny {
            let m = j.at(i, jj);
            match (xs[i] > 0, ys[jj] > 0) {
                (false, false) => p00 += m,
                (false, true) => {
                    p01 += m;
                    y_given_x0[jj] += m;
                }
                (true, false) => {
                    p10 += m;
                    x_given_y0[i] += m;
                }
                (true, true) => {
                    p11 += m;
                    x_given_ypos[i] += m;
                    y_given_xpos[jj] += m;
                }
            }
        }
    }

    let x10 = conditional_positive(xs, &x_given_y0);
    let x11 = conditional_positive(xs, &x_given_ypos);
    let y01 = conditional_positive(ys, &y_given_x0);
    let y11 = conditional_positive(ys, &y_given_xpos);

    let mut degenerate = Vec::new();
    let (p1_star, p1_dagger) = match (&x10, &x11) {
        (Some(a), Some(b)) => exceed_and_tie(a, b),
        _ => {
            degenerate.extend(["p1_star", "p1_dagger"]);
            (0.0, 0.0)
        }
    };
    let (p2_star, p2_dagger) = match (&y01, &y11) {
        (Some(a), Some(b)) => exceed_and_tie(a, b),
        _ => {
            degenerate.extend(["p2_star", "p2_dagger"]);
            (0.0, 0.0)
        }
    };

    let positive = j.sub_block(1, 1);
    let conditional_rho =
        |x2: &Option<DiscretePmf>, y3: &Option<DiscretePmf>| match (&positive, x2, y3) {
            (Some(k), Some(x2), Some(y3)) => {
                let sx = sign_scores_at(x2, k.x_support());
                let sy = sign_scores_at(y3, k.y_support());
                Some(3.0 * weighted_sign_sum(k, &sx, &sy))
            }
            _ => None,
        };
    let mut rho = |name: &'static str, x2: &Option<DiscretePmf>, y3: &Option<DiscretePmf>| {
        conditional_rho(x2, y3).unwrap_or_else(|| {
            degenerate.push(name);
            0.0
        })
    };
    let rho_s11 = rho("rho_s11", &x11, &y11);
    let rho_s10 = rho("rho_s10", &x10, &y11);
    let rho_s01 = rho("rho_s01", &x11, &y01);
    let rho_s00 = rho("rho_s00", &x10, &y01);

    let mut summary = DecompositionSummary::from_components(
        [p00, p01, p10, p11],
        [p1_star, p1_dagger, p2_star, p2_dagger],
        [rho_s11, rho_s10, rho_s01, rho_s00],
        degenerate,
    );
    summary.x10 = x10;
    summary.x11 = x11;
    summary.y01 = y01;
    summary.y11 = y11;
    summary
}

/// Reassembles rho from its zero-inflation components.
pub fn rho_from_decomposition(d: &DecompositionSummary) -> f64 {
    d.p11 * d.rho_s_star
        + 3.0
            * d.p11
            * (d.p10 * (1.0 - 2.0 * d.p1_star - d.p1_dagger)
                + d.p01 * (1.0 - 2.0 * d.p2_star - d.p2_dagger))
        + 3.0 * (d.p00 * d.p11 - d.p01 * d.p10)
}

/// Joint law of `(X, Y)` given `X > 0, Y > 0`.
pub fn condition_positive(j: &JointPmf) -> Result<JointPmf> {
    j.sub_block(1, 1)
        .ok_or(Error::DegenerateConditioning("P(X > 0, Y > 0) = 0"))
}
