//! Reference implementations used as test oracles. They favour the most
//! literal formulation over speed and share no code with the library.

#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};

/// Cox-de Boor recursion expanded literally, with `0/0 = 0` and the last
/// non-empty interval closed on the right.
pub fn cox_de_boor(knots: &[f64], i: usize, p: usize, t: f64) -> f64 {
    if p == 0 {
        let (lo, hi) = (knots[i], knots[i + 1]);
        let b = *knots.last().unwrap();
        if lo <= t && t < hi {
            return 1.0;
        }
        // closed right end: the last interval with positive width owns t = b
        if t == b && hi == b && lo < hi {
            return 1.0;
        }
        return 0.0;
    }
    let mut v = 0.0;
    let d1 = knots[i + p] - knots[i];
    if d1 > 0.0 {
        v += (t - knots[i]) / d1 * cox_de_boor(knots, i, p - 1, t);
    }
    let d2 = knots[i + p + 1] - knots[i + 1];
    if d2 > 0.0 {
        v += (knots[i + p + 1] - t) / d2 * cox_de_boor(knots, i + 1, p - 1, t);
    }
    v
}

/// Clamped uniform knots built directly from the definition.
pub fn uniform_knots(a: f64, b: f64, k: usize, p: usize) -> Vec<f64> {
    let interior = k - p - 1;
    let mut knots = vec![a; p + 1];
    for j in 1..=interior {
        knots.push(a + (b - a) * j as f64 / (interior + 1) as f64);
    }
    knots.extend(std::iter::repeat(b).take(p + 1));
    knots
}

/// Least-squares coefficients `(BᵀB)⁻¹ Bᵀ y` by explicit dense inversion,
/// with the design matrix built from the literal recursion.
pub fn dense_least_squares(knots: &[f64], p: usize, grid: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let k = knots.len() - p - 1;
    let b = DMatrix::from_fn(grid.len(), k, |j, i| cox_de_boor(knots, i, p, grid[j]));
    let gram = b.transpose() * &b;
    let inv = gram.try_inverse()?;
    let c = inv * b.transpose() * DVector::from_column_slice(y);
    Some(c.iter().copied().collect())
}

/// Labels of the `h` nearest rows by a full scan, sorting all distances.
pub fn knn_exhaustive(train: &[Vec<f64>], labels: &[usize], query: &[f64], h: usize, v: f64, z: usize) -> usize {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let s: f64 = row.iter().zip(query).map(|(a, b)| (a - b).abs().powf(v)).sum();
            (s.powf(1.0 / v), i)
        })
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; z];
    for &(_, i) in d.iter().take(h) {
        votes[labels[i]] += 1;
    }
    let max = *votes.iter().max().unwrap();
    votes.iter().position(|&c| c == max).unwrap()
}

pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
}

/// Best root split by trying every feature and every midpoint between
/// consecutive distinct values; returns `(weighted child impurity, feature, threshold)`.
pub fn best_root_split(x: &[Vec<f64>], y: &[usize], z: usize) -> Option<(f64, usize, f64)> {
    let n = y.len();
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let th = (w[0] + w[1]) / 2.0;
            let mut l = vec![0; z];
            let mut r = vec![0; z];
            for i in 0..n {
                if x[i][f] < th {
                    l[y[i]] += 1;
                } else {
                    r[y[i]] += 1;
                }
            }
            let nl: usize = l.iter().sum();
            let score = (nl as f64 * gini(&l) + (n - nl) as f64 * gini(&r)) / n as f64;
            if best.is_none_or(|b| score < b.0 - 1e-12) {
                best = Some((score, f, th));
            }
        }
    }
    best
}

/// Largest drop in the residual sum of squares over every
/// feature and every midpoint between consecutive distinct values.
pub fn best_residual_split(x: &[Vec<f64>], r: &[f64]) -> Option<f64> {
    let n = r.len() as f64;
    let total: f64 = r.iter().sum();
    let mut best: Option<f64> = None;
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = x.iter().map(|row| row[f]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let th = (w[0] + w[1]) / 2.0;
            let (mut sl, mut nl) = (0.0, 0.0);
            for (row, ri) in x.iter().zip(r) {
                if row[f] < th {
                    sl += ri;
                    nl += 1.0;
                }
            }
            let sr = total - sl;
            let gain = sl * sl / nl + sr * sr / (n - nl) - total * total / n;
            best = Some(best.map_or(gain, |b: f64| b.max(gain)));
        }
    }
    best
}

/// Mean logistic loss of scores `f` against binary labels.
pub fn logistic_loss(f: &[f64], y: &[usize]) -> f64 {
    f.iter()
        .zip(y)
        .map(|(&s, &l)| {
            // log(1 + e^{-s}) for positives, log(1 + e^{s}) for negatives
            let m = if l == 1 { -s } else { s };
            if m > 0.0 {
                m + (-m).exp().ln_1p()
            } else {
                m.exp().ln_1p()
            }
        })
        .sum::<f64>()
        / f.len() as f64
}

/// Directory holding the UCR benchmark files.
pub fn ucr_dir() -> PathBuf {
    match std::env::var_os("FNVOTE_UCR_DIR") {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ucr"),
    }
}

pub fn ucr_pair(name: &str) -> Option<(PathBuf, PathBuf)> {
    let dir = ucr_dir();
    let train = dir.join(format!("{name}_TRAIN.tsv"));
    let test = dir.join(format!("{name}_TEST.tsv"));
    (train.exists() && test.exists()).then_some((train, test))
}
