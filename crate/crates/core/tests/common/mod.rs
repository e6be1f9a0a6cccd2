//! Reference implementations written from the definitions, sharing no code
//! with the library beyond its data types.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zirho::{DiscretePmf, JointPmf};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_support(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<u64> {
    let len = rng.gen_range(1..=max_len);
    let mut values: Vec<u64> = Vec::new();
    if rng.gen_bool(0.85) {
        values.push(0);
    }
    while values.len() < len {
        let v = rng.gen_range(1..=12);
        if !values.contains(&v) {
            values.push(v);
        }
    }
    values.sort_unstable();
    values
}

/// Random joint pmf on at most `max_nx x max_ny` cells, with about a third
/// of the cells set to exactly zero.
pub fn random_joint(rng: &mut ChaCha8Rng, max_nx: usize, max_ny: usize) -> JointPmf {
    loop {
        let xs = random_support(rng, max_nx);
        let ys = random_support(rng, max_ny);
        let mut mass: Vec<f64> = (0..xs.len() * ys.len())
            .map(|_| {
                if rng.gen_bool(0.35) {
                    0.0
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        let total: f64 = mass.iter().sum();
        if total <= 0.0 {
            continue;
        }
        mass.iter_mut().for_each(|m| *m /= total);
        return JointPmf::new(xs, ys, mass).unwrap();
    }
}

/// Random pmf on `0..=max`, zero mass drawn separately.
pub fn random_margin(rng: &mut ChaCha8Rng, max: u64) -> DiscretePmf {
    let zero = rng.gen_range(0.05..0.9);
    let support: Vec<u64> = (0..=max).collect();
    let mut rest: Vec<f64> = (1..=max).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = rest.iter().sum();
    rest.iter_mut().for_each(|p| *p *= (1.0 - zero) / s);
    let mut probs = vec![zero];
    probs.extend(rest);
    DiscretePmf::new(support, probs).unwrap()
}

fn margins(j: &JointPmf) -> (BTreeMap<u64, f64>, BTreeMap<u64, f64>) {
    let mut fx = BTreeMap::new();
    let mut gy = BTreeMap::new();
    for (x, y, m) in j.cells() {
        *fx.entry(x).or_insert(0.0) += m;
        *gy.entry(y).or_insert(0.0) += m;
    }
    (fx, gy)
}

/// `3 (P(X1<X2, Y1<Y3) + P(X1>X2, Y1>Y3) - P(X1<X2, Y1>Y3) - P(X1>X2, Y1<Y3))`
/// with `(X1, Y1) ~ J`, `X2 ~ F`, `Y3 ~ G` independent, by enumerating every
/// triple of outcomes.
pub fn rho_by_enumeration(j: &JointPmf) -> f64 {
    let (fx, gy) = margins(j);
    let (mut cc, mut dd, mut cd, mut dc) = (0.0, 0.0, 0.0, 0.0);
    for (x1, y1, h) in j.cells() {
        for (&x2, &f) in &fx {
            for (&y3, &g) in &gy {
                let w = h * f * g;
                if x1 < x2 && y1 < y3 {
                    cc += w;
                }
                if x1 > x2 && y1 > y3 {
                    dd += w;
                }
                if x1 < x2 && y1 > y3 {
                    cd += w;
                }
                if x1 > x2 && y1 < y3 {
                    dc += w;
                }
            }
        }
    }
    3.0 * (cc + dd - cd - dc)
}

/// Conditional law of one coordinate on its positive values, given the
/// other coordinate's zero pattern. `None` when the event has no mass.
fn conditional(j: &JointPmf, of_x: bool, other_positive: bool) -> Option<BTreeMap<u64, f64>> {
    let mut out = BTreeMap::new();
    for (x, y, m) in j.cells() {
        let (this, other) = if of_x { (x, y) } else { (y, x) };
        if this > 0 && (other > 0) == other_positive {
            *out.entry(this).or_insert(0.0) += m;
        }
    }
    let total: f64 = out.values().sum();
    if total <= 0.0 {
        return None;
    }
    out.values_mut().for_each(|p| *p /= total);
    Some(out)
}

fn exceed_tie(a: &BTreeMap<u64, f64>, b: &BTreeMap<u64, f64>) -> (f64, f64) {
    let (mut gt, mut eq) = (0.0, 0.0);
    for (&u, &pu) in a {
        for (&v, &pv) in b {
            if u > v {
                gt += pu * pv;
            } else if u == v {
                eq += pu * pv;
            }
        }
    }
    (gt, eq)
}

fn sign(a: u64, b: u64) -> f64 {
    match a.cmp(&b) {
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => 1.0,
    }
}

/// All scalar fields of the zero-inflation decomposition, by enumeration.
#[derive(Debug, Clone, Copy)]
pub struct BruteDecomposition {
    pub p: [f64; 4],
    pub p1_star: f64,
    pub p1_dagger: f64,
    pub p2_star: f64,
    pub p2_dagger: f64,
    pub rho: [f64; 4],
}

pub fn decomposition_by_enumeration(j: &JointPmf) -> BruteDecomposition {
    let mut p = [0.0; 4];
    for (x, y, m) in j.cells() {
        p[2 * usize::from(x > 0) + usize::from(y > 0)] += m;
    }
    let x10 = conditional(j, true, false);
    let x11 = conditional(j, true, true);
    let y01 = conditional(j, false, false);
    let y11 = conditional(j, false, true);
    let (p1_star, p1_dagger) = match (&x10, &x11) {
        (Some(a), Some(b)) => exceed_tie(a, b),
        _ => (0.0, 0.0),
    };
    let (p2_star, p2_dagger) = match (&y01, &y11) {
        (Some(a), Some(b)) => exceed_tie(a, b),
        _ => (0.0, 0.0),
    };
    let positive: Vec<(u64, u64, f64)> = j.cells().filter(|&(x, y, _)| x > 0 && y > 0).collect();
    let p11: f64 = positive.iter().map(|c| c.2).sum();
    let cond_rho = |x2: &Option<BTreeMap<u64, f64>>, y3: &Option<BTreeMap<u64, f64>>| match (x2, y3)
    {
        (Some(x2), Some(y3)) if p11 > 0.0 => {
            let mut s = 0.0;
            for &(x1, y1, h) in &positive {
                for (&a, &pa) in x2 {
                    for (&b, &pb) in y3 {
                        s += h / p11 * pa * pb * sign(x1, a) * sign(y1, b);
                    }
                }
            }
            3.0 * s
        }
        _ => 0.0,
    };
    BruteDecomposition {
        p,
        p1_star,
        p1_dagger,
        p2_star,
        p2_dagger,
        rho: [
            cond_rho(&x11, &y11),
            cond_rho(&x10, &y11),
            cond_rho(&x11, &y01),
            cond_rho(&x10, &y01),
        ],
    }
}

/// Mid-ranks by counting: `#{v < a} + (#{v = a} + 1) / 2`.
pub fn mid_ranks_by_counting(values: &[u64]) -> Vec<f64> {
    values
        .iter()
        .map(|&a| {
            let less = values.iter().filter(|&&v| v < a).count() as f64;
            let equal = values.iter().filter(|&&v| v == a).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Naive estimator components straight from the index-set definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveComponents {
    pub p1_star: Option<f64>,
    pub p1_dagger: Option<f64>,
    pub p2_star: Option<f64>,
    pub p2_dagger: Option<f64>,
    pub rho_s10: Option<f64>,
    pub rho_s01: Option<f64>,
    pub rho_s00: Option<f64>,
}

pub fn naive_components(pairs: &[(u64, u64)]) -> NaiveComponents {
    let a: Vec<(u64, u64)> = pairs
        .iter()
        .copied()
        .filter(|&(x, y)| x > 0 && y > 0)
        .collect();
    let b10: Vec<u64> = pairs
        .iter()
        .filter(|&&(x, y)| x > 0 && y == 0)
        .map(|p| p.0)
        .collect();
    let b01: Vec<u64> = pairs
        .iter()
        .filter(|&&(x, y)| x == 0 && y > 0)
        .map(|p| p.1)
        .collect();

    let ratio = |left: &[u64], right: &[u64], pick: fn(u64, u64) -> bool| {
        let total = left.len() * right.len();
        if total == 0 {
            return None;
        }
        let mut hits = 0u64;
        for &l in left {
            for &r in right {
                if pick(l, r) {
                    hits += 1;
                }
            }
        }
        Some(hits as f64 / total as f64)
    };
    let ax: Vec<u64> = a.iter().map(|p| p.0).collect();
    let ay: Vec<u64> = a.iter().map(|p| p.1).collect();

    // j over B10 (or A11 \ {i}), k over B01 (or A11 \ {i})
    let triple = |j_from_b: bool, k_from_b: bool| -> Option<f64> {
        let mut total = 0i64;
        let mut count = 0i64;
        for (i, &(xi, yi)) in a.iter().enumerate() {
            let js: Vec<u64> = if j_from_b {
                b10.clone()
            } else {
                a.iter()
                    .enumerate()
                    .filter(|&(t, _)| t != i)
                    .map(|(_, p)| p.0)
                    .collect()
            };
            let ks: Vec<u64> = if k_from_b {
                b01.clone()
            } else {
                a.iter()
                    .enumerate()
                    .filter(|&(t, _)| t != i)
                    .map(|(_, p)| p.1)
                    .collect()
            };
            for &xj in &js {
                for &yk in &ks {
                    total += (sign(xi, xj) * sign(yi, yk)) as i64;
                    count += 1;
                }
            }
        }
        (count > 0).then(|| 3.0 * total as f64 / count as f64)
    };
    NaiveComponents {
        p1_star: ratio(&b10, &ax, |l, r| l > r),
        p1_dagger: ratio(&b10, &ax, |l, r| l == r),
        p2_star: ratio(&b01, &ay, |l, r| l > r),
        p2_dagger: ratio(&b01, &ay, |l, r| l == r),
        rho_s10: triple(true, false),
        rho_s01: triple(false, true),
        rho_s00: triple(true, true),
    }
}
