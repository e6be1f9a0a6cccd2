//! Copulas, bivariate pmf grids and sampling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::PairedSample;
use crate::margins::DiscretePmf;

/// Rectangle masses above this magnitude (negative) indicate a bug rather
/// than rounding.
const NEGATIVE_MASS_TOLERANCE: f64 = 1e-12;

/// Dependence structure joining two margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CopulaSpec {
    /// `(1 - alpha) uv + alpha min(u, v)`
    Frechet {
        alpha: f64,
    },
    UpperBoundM,
    LowerBoundW,
    Independence,
}

impl CopulaSpec {
    pub fn validate(&self) -> Result<()> {
        if let CopulaSpec::Frechet { alpha } = self {
            if !(0.0..=1.0).contains(alpha) {
                return Err(Error::InvalidSpec(format!(
                    "Frechet alpha = {alpha} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

impl FromStr for CopulaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let spec = match s {
            "m" | "M" => CopulaSpec::UpperBoundM,
            "w" | "W" => CopulaSpec::LowerBoundW,
            "indep" => CopulaSpec::Independence,
            _ => {
                let alpha = s
                    .strip_prefix("frechet:alpha=")
                    .ok_or_else(|| {
                        Error::InvalidSpec(format!(
                            "unknown copula `{s}`; expected frechet:alpha=<f>, m, w or indep"
                        ))
                    })?
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidSpec(format!("bad alpha in `{s}`")))?;
                CopulaSpec::Frechet { alpha }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopulaSpec::Frechet { alpha } => write!(f, "frechet:alpha={alpha}"),
            CopulaSpec::UpperBoundM => f.write_str("m"),
            CopulaSpec::LowerBoundW => f.write_str("w"),
            CopulaSpec::Independence => f.write_str("indep"),
        }
    }
}

pub fn copula_cdf(c: CopulaSpec, u: f64, v: f64) -> f64 {
    match c {
        CopulaSpec::Frechet { alpha } => (1.0 - alpha) * u * v + alpha * u.min(v),
        CopulaSpec::UpperBoundM => u.min(v),
        CopulaSpec::LowerBoundW => (u + v - 1.0).max(0.0),
        CopulaSpec::Independence => u * v,
    }
}

/// Finite bivariate pmf on a rectangular grid, with its margins cached.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    x_support: Vec<u64>,
    y_support: Vec<u64>,
    /// Row-major: `mass[i * ny + j]` is the mass at `(x_support[i], y_support[j])`.
    mass: Vec<f64>,
    x_margin: DiscretePmf,
    y_margin: DiscretePmf,
}

impl JointPmf {
    /// Builds a grid from explicit masses. The total must be one within
    /// `1e-9`; it is then renormalized exactly.
    pub fn new(x_support: Vec<u64>, y_support: Vec<u64>, mass: Vec<f64>) -> Result<Self> {
        if x_support.is_empty() || y_support.is_empty() {
            return Err(Error::InvalidInput(
                "joint pmf needs a nonempty grid".into(),
            ));
        }
        if mass.len() != x_support.len() * y_support.len() {
            return Err(Error::InvalidInput(format!(
                "grid is {}x{} but {} masses were given",
                x_support.len(),
                y_support.len(),
                mass.len()
            )));
        }
        for s in [&x_support, &y_support] {
            if s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(
                    "joint pmf supports must be strictly increasing".into(),
                ));
            }
        }
        if let Some(m) = mass.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidInput(format!("invalid joint mass {m}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "joint masses sum to {total}, expected 1"
            )));
        }
        Ok(Self::from_normalized(
            x_support,
            y_support,
            mass.into_iter().map(|m| m / total).collect(),
        ))
    }

    fn from_normalized(x_support: Vec<u64>, y_support: Vec<u64>, mass: Vec<f64>) -> Self {
        let ny = y_support.len();
        let mut rows = vec![0.0; x_support.len()];
        let mut cols = vec![0.0; ny];
        for (k, &m) in mass.iter().enumerate() {
            rows[k / ny] += m;
            cols[k % ny] += m;
        }
        let x_margin = DiscretePmf::from_parts_unchecked(x_support.clone(), rows);
        let y_margin = DiscretePmf::from_parts_unchecked(y_support.clone(), cols);
        JointPmf {
            x_support,
            y_support,
            mass,
            x_margin,
            y_margin,
        }
    }

    /// Unit mass at a single pair.
    pub fn point_mass(x: u64, y: u64) -> Self {
        Self::from_normalized(vec![x], vec![y], vec![1.0])
    }

    pub fn x_support(&self) -> &[u64] {
        &self.x_support
    }

    pub fn y_support(&self) -> &[u64] {
        &self.y_support
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn nx(&self) -> usize {
        self.x_support.len()
    }

    pub fn ny(&self) -> usize {
        self.y_support.len()
    }

    /// Mass at grid cell `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.y_support.len() + j]
    }

    /// Mass at the value pair `(x, y)`; zero off the grid.
    pub fn prob(&self, x: u64, y: u64) -> f64 {
        match (
            self.x_support.binary_search(&x),
            self.y_support.binary_search(&y),
        ) {
            (Ok(i), Ok(j)) => self.at(i, j),
            _ => 0.0,
        }
    }

    pub fn x_margin(&self) -> &DiscretePmf {
        &self.x_margin
    }

    pub fn y_margin(&self) -> &DiscretePmf {
        &self.y_margin
    }

    /// Iterates `(x, y, mass)` over all grid cells.
    pub fn cells(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        let ny = self.y_support.len();
        self.mass
            .iter()
            .enumerate()
            .map(move |(k, &m)| (self.x_support[k / ny], self.y_support[k % ny], m))
    }

    /// The same distribution with the two coordinates exchanged.
    pub fn transposed(&self) -> JointPmf {
        let (nx, ny) = (self.nx(), self.ny());
        let mut mass = vec![0.0; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                mass[j * nx + i] = self.at(i, j);
            }
        }
        Self::from_normalized(self.y_support.clone(), self.x_support.clone(), mass)
    }

    /// Renormalized restriction to the cells with `x >= x_min` and `y >= y_min`.
    /// Returns `None` when that block carries no mass beyond rounding.
    pub(crate) fn sub_block(&self, x_min: u64, y_min: u64) -> Option<JointPmf> {
        let i0 = self.x_support.partition_point(|&x| x < x_min);
        let j0 = self.y_support.partition_point(|&y| y < y_min);
        if i0 == self.nx() || j0 == self.ny() {
            return None;
        }
        let mut mass = Vec::with_capacity((self.nx() - i0) * (self.ny() - j0));
        for i in i0..self.nx() {
            mass.extend_from_slice(&self.mass[i * self.ny() + j0..(i + 1) * self.ny()]);
        }
        let total: f64 = mass.iter().sum();
        if total <= 1e-12 {
            return None;
        }
        mass.iter_mut().for_each(|m| *m /= total);
        Some(Self::from_normalized(
            self.x_support[i0..].to_vec(),
            self.y_support[j0..].to_vec(),
            mass,
        ))
    }
}

/// Joint pmf of `(F^-1(U), G^-1(V))` with `(U, V) ~ c`, obtained by taking
/// rectangle differences of `C(F(x), G(y))`.
pub fn joint_pmf(f: &DiscretePmf, g: &DiscretePmf, c: CopulaSpec) -> Result<JointPmf> {
    c.validate()?;
    let fc = f.cdf_values();
    let gc = g.cdf_values();
    let ny = g.len();
    let mut mass = Vec::with_capacity(f.len() * ny);
    let mut total = 0.0;
    for i in 0..f.len() {
        let f_hi = fc[i];
        let f_lo = if i == 0 { 0.0 } else { fc[i - 1] };
        for j in 0..ny {
            let g_hi = gc[j];
            let g_lo = if j == 0 { 0.0 } else { gc[j - 1] };
            let m =
                copula_cdf(c, f_hi, g_hi) - copula_cdf(c, f_lo, g_hi) - copula_cdf(c, f_hi, g_lo)
                    + copula_cdf(c, f_lo, g_lo);
            let m = if m < 0.0 {
                if m < -NEGATIVE_MASS_TOLERANCE {
                    return Err(Error::InternalConsistency(format!(
                        "rectangle mass {m} at ({}, {})",
                        f.support()[i],
                        g.support()[j]
                    )));
                }
                0.0
            } else {
                m
            };
            total += m;
            mass.push(m);
        }
    }
    mass.iter_mut().for_each(|m| *m /= total);
    Ok(JointPmf::from_normalized(
        f.support().to_vec(),
        g.support().to_vec(),
        mass,
    ))
}

/// Random stream for one index under a fixed key.
pub(crate) fn indexed_stream(key: &ChaCha8Rng, index: u64) -> ChaCha8Rng {
    let mut rng = key.clone();
    rng.set_stream(index);
    rng.set_word_pos(0);
    rng
}

/// Draws `n` pairs from the Frechet copula `C_alpha` with margins `f`, `g`.
///
/// Each pair uses its own ChaCha8 stream (key from `seed`, stream id = pair
/// index): with probability `alpha` both coordinates come from one uniform
/// (comonotone), otherwise from two independent uniforms.
pub fn sample_pairs(
    f: &DiscretePmf,
    g: &DiscretePmf,
    alpha: f64,
    n: usize,
    seed: u64,
) -> Result<PairedSample> {
    CopulaSpec::Frechet { alpha }.validate()?;
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let key = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..n as u64)
        .map(|i| {
            let mut rng = indexed_stream(&key, i);
            let comonotone = rng.gen::<f64>() < alpha;
            let u: f64 = rng.gen();
            let v = if comonotone { u } else { rng.gen() };
            (f.quantile(u), g.quantile(v))
        })
        .collect();
    PairedSample::new(pairs)
}
