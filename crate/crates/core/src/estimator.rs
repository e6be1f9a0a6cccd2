//! Sample-based estimation of rho for zero-inflated count pairs.
//!
//! The plug-in estimator splits the sample by the zero pattern of each pair,
//! estimates every ingredient of the zero-inflation identity from the
//! resulting subsamples and reassembles them with [`rho_from_decomposition`].
//!
//! The conditional rhos other than `rho_s11` are three-index sign
//! U-statistics. For a fixed anchor `i` the `j` and `k` slots are
//! independent, so each statistic reduces to `sum_i cx(i) * cy(i)` with
//! `cx`, `cy` signed rank counts; all counting is done in integers, which
//! makes the fast path bit-identical to the literal triple loop.

use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rho_from_decomposition, DecompositionSummary};

/// Observed nonnegative integer pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedSample {
    pairs: Vec<(u64, u64)>,
}

impl PairedSample {
    pub fn new(pairs: Vec<(u64, u64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        Ok(PairedSample { pairs })
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn xs(&self) -> Vec<u64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<u64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    /// Reads `x,y` integer rows. A first row that does not parse as two
    /// integers is taken to be a header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Csv(format!(
                    "line {}: expected 2 columns, found {}",
                    line + 1,
                    record.len()
                )));
            }
            match (record[0].parse::<u64>(), record[1].parse::<u64>()) {
                (Ok(x), Ok(y)) => pairs.push((x, y)),
                _ if line == 0 && !looks_numeric(&record[0]) && !looks_numeric(&record[1]) => {
                    continue
                }
                _ => {
                    return Err(Error::Csv(format!(
                        "line {}: `{},{}` is not a pair of nonnegative integers",
                        line + 1,
                        &record[0],
                        &record[1]
                    )))
                }
            }
        }
        Self::new(pairs)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }
}

fn looks_numeric(field: &str) -> bool {
    field.parse::<f64>().is_ok()
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn mid_ranks(values: &[u64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| values[i]);
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let v = values[order[start]];
        let end = start + order[start..].partition_point(|&i| values[i] == v);
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of two equally long sequences; `None` when either
/// has zero variance.
pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Classical Spearman correlation with mid-ranks for ties.
pub fn spearman_midrank_values(xs: &[u64], ys: &[u64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "coordinate lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: xs.len(),
        });
    }
    pearson(&mid_ranks(xs), &mid_ranks(ys))
        .ok_or(Error::DegenerateStatistic("a coordinate is constant"))
}

pub fn spearman_midrank(s: &PairedSample) -> Result<f64> {
    spearman_midrank_values(&s.xs(), &s.ys())
}

/// Index sets of the four zero patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ZeroSplit {
    /// `x > 0, y > 0`
    pub a11: Vec<usize>,
    /// `x > 0, y = 0`
    pub b10: Vec<usize>,
    /// `x = 0, y > 0`
    pub b01: Vec<usize>,
    /// `x = 0, y = 0`
    pub z00: Vec<usize>,
}

impl ZeroSplit {
    /// Empirical quadrant frequencies `[p00, p01, p10, p11]`.
    pub fn frequencies(&self) -> [f64; 4] {
        let n = (self.a11.len() + self.b10.len() + self.b01.len() + self.z00.len()) as f64;
        [
            self.z00.len() as f64 / n,
            self.b01.len() as f64 / n,
            self.b10.len() as f64 / n,
            self.a11.len() as f64 / n,
        ]
    }
}

pub fn split_by_zero(s: &PairedSample) -> ZeroSplit {
    let mut split = ZeroSplit::default();
    for (i, &(x, y)) in s.pairs().iter().enumerate() {
        match (x > 0, y > 0) {
            (true, true) => split.a11.push(i),
            (true, false) => split.b10.push(i),
            (false, true) => split.b01.push(i),
            (false, false) => split.z00.push(i),
        }
    }
    split
}

/// `(#{a > b}, #{a = b})` over all pairs `a` in `left`, `b` in `right`.
fn count_greater_equal(left: &[u64], right: &[u64]) -> (u64, u64) {
    let mut sorted = right.to_vec();
    sorted.sort_unstable();
    let mut greater = 0u64;
    let mut equal = 0u64;
    for &a in left {
        let lt = sorted.partition_point(|&b| b < a);
        let le = sorted.partition_point(|&b| b <= a);
        greater += lt as u64;
        equal += (le - lt) as u64;
    }
    (greater, equal)
}

/// For every `a` in `anchors`, `#{b in others: b < a} - #{b in others: b > a}`.
fn signed_counts(anchors: &[u64], others: &[u64]) -> Vec<i64> {
    let mut sorted = others.to_vec();
    sorted.sort_unstable();
    let m = sorted.len() as i64;
    anchors
        .iter()
        .map(|&a| {
            let lt = sorted.partition_point(|&b| b < a) as i64;
            let le = sorted.partition_point(|&b| b <= a) as i64;
            lt - (m - le)
        })
        .collect()
}

/// Empirical cross exceedance and tie probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PStarDagger {
    pub p1_star: f64,
    pub p1_dagger: f64,
    pub p2_star: f64,
    pub p2_dagger: f64,
    /// `B10` or `A11` empty.
    pub x_degenerate: bool,
    /// `B01` or `A11` empty.
    pub y_degenerate: bool,
}

fn coords(s: &PairedSample, idx: &[usize], x: bool) -> Vec<u64> {
    idx.iter()
        .map(|&i| if x { s.pairs()[i].0 } else { s.pairs()[i].1 })
        .collect()
}

fn p_star_dagger_from(s: &PairedSample, split: &ZeroSplit) -> PStarDagger {
    let ratio = |left: &[u64], right: &[u64]| -> Option<(f64, f64)> {
        if left.is_empty() || right.is_empty() {
            return None;
        }
        let (g, e) = count_greater_equal(left, right);
        let total = (left.len() as u64 * right.len() as u64) as f64;
        Some((g as f64 / total, e as f64 / total))
    };
    let x = ratio(&coords(s, &split.b10, true), &coords(s, &split.a11, true));
    let y = ratio(&coords(s, &split.b01, false), &coords(s, &split.a11, false));
    let (p1_star, p1_dagger) = x.unwrap_or((0.0, 0.0));
    let (p2_star, p2_dagger) = y.unwrap_or((0.0, 0.0));
    PStarDagger {
        p1_star,
        p1_dagger,
        p2_star,
        p2_dagger,
        x_degenerate: x.is_none(),
        y_degenerate: y.is_none(),
    }
}

/// `p1*`, `p1†` from `B10 x A11` (x coordinate) and `p2*`, `p2†` from
/// `B01 x A11` (y coordinate).
pub fn estimate_p_star_dagger(s: &PairedSample) -> PStarDagger {
    p_star_dagger_from(s, &split_by_zero(s))
}

/// Conditional rho estimates; `None` entries are degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoAbEstimates {
    pub rho_s11: Option<f64>,
    pub rho_s10: Option<f64>,
    pub rho_s01: Option<f64>,
    pub rho_s00: Option<f64>,
}

fn rho_ab_from(s: &PairedSample, split: &ZeroSplit) -> RhoAbEstimates {
    let ax = coords(s, &split.a11, true);
    let ay = coords(s, &split.a11, false);
    let bx = coords(s, &split.b10, true);
    let by = coords(s, &split.b01, false);
    let na = ax.len() as i128;

    let rho_s11 = if ax.len() >= 2 {
        pearson(&mid_ranks(&ax), &mid_ranks(&ay))
    } else {
        None
    };

    // j, k over A11 never pair with themselves: sign(0) = 0, so only the
    // divisor changes.
    let cx_a = signed_counts(&ax, &ax);
    let cy_a = signed_counts(&ay, &ay);
    let cx_b = signed_counts(&ax, &bx);
    let cy_b = signed_counts(&ay, &by);

    let u_stat = |cx: &[i64], cy: &[i64], denom: i128| -> Option<f64> {
        if denom <= 0 {
            return None;
        }
        let total: i128 = cx
            .iter()
            .zip(cy)
            .map(|(&a, &b)| a as i128 * b as i128)
            .sum();
        Some(3.0 * total as f64 / denom as f64)
    };
    let nb10 = bx.len() as i128;
    let nb01 = by.len() as i128;
    RhoAbEstimates {
        rho_s11,
        rho_s10: u_stat(&cx_b, &cy_a, na * nb10 * (na - 1)),
        rho_s01: u_stat(&cx_a, &cy_b, na * (na - 1) * nb01),
        rho_s00: u_stat(&cx_b, &cy_b, na * nb10 * nb01),
    }
}

pub fn estimate_rho_ab(s: &PairedSample) -> RhoAbEstimates {
    rho_ab_from(s, &split_by_zero(s))
}

/// Plug-in estimate together with everything it was assembled from.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateResult {
    pub rho_a: f64,
    pub components: DecompositionSummary,
    pub n11: usize,
    pub n10: usize,
    pub n01: usize,
    pub n00: usize,
    pub degenerate_flags: Vec<&'static str>,
}

/// The decomposition estimator: the zero-inflation identity with every
/// component replaced by its empirical counterpart.
pub fn estimate_rho_a(s: &PairedSample) -> Result<EstimateResult> {
    if s.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: s.len(),
        });
    }
    let split = split_by_zero(s);
    let ps = p_star_dagger_from(s, &split);
    let rhos = rho_ab_from(s, &split);

    let mut flags = Vec::new();
    if ps.x_degenerate {
        flags.extend(["p1_star", "p1_dagger"]);
    }
    if ps.y_degenerate {
        flags.extend(["p2_star", "p2_dagger"]);
    }
    let mut take = |name: &'static str, v: Option<f64>| {
        v.unwrap_or_else(|| {
            flags.push(name);
            0.0
        })
    };
    let rho_s11 = take("rho_s11", rhos.rho_s11);
    let rho_s10 = take("rho_s10", rhos.rho_s10);
    let rho_s01 = take("rho_s01", rhos.rho_s01);
    let rho_s00 = take("rho_s00", rhos.rho_s00);

    let components = DecompositionSummary::from_components(
        split.frequencies(),
        [ps.p1_star, ps.p1_dagger, ps.p2_star, ps.p2_dagger],
        [rho_s11, rho_s10, rho_s01, rho_s00],
        flags.clone(),
    );
    Ok(EstimateResult {
        rho_a: rho_from_decomposition(&components),
        components,
        n11: split.a11.len(),
        n10: split.b10.len(),
        n01: split.b01.len(),
        n00: split.z00.len(),
        degenerate_flags: flags,
    })
}
