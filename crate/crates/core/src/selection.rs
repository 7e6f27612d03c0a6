//! Choice of the number of basis functions per degree by stratified
//! cross-validation of the downstream classifier.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{smooth_dataset, BasisSpec};
use crate::classifiers::ModelSpec;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Which size the candidate grid scales with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    /// Series length `P`.
    #[default]
    Length,
    /// Number of training rows `N`.
    Rows,
}

impl std::str::FromStr for GridScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length" => Ok(GridScale::Length),
            "rows" => Ok(GridScale::Rows),
            other => Err(Error::Param(format!("unknown grid scale {other:?} (expected length or rows)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGrid {
    candidates: Vec<usize>,
}

impl KGrid {
    pub fn new(candidates: Vec<usize>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidSpec("candidate grid is empty".into()));
        }
        if candidates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec("candidate grid must be strictly increasing".into()));
        }
        Ok(Self { candidates })
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }
}

/// Candidates `⌊j·base/20⌋` for `j = 1..=10`, each raised to at least
/// `degree + 1`, deduplicated.
pub fn k_grid(base: usize, degree: usize) -> Result<KGrid> {
    if base < 2 * (degree + 1) {
        return Err(Error::InvalidSpec(format!(
            "size {base} is too small for degree {degree}: need at least {}",
            2 * (degree + 1)
        )));
    }
    let mut candidates: Vec<usize> = (1..=10).map(|j| (j * base / 20).max(degree + 1)).collect();
    candidates.dedup();
    KGrid::new(candidates)
}

pub fn k_grid_for(train: &LabeledDataset, degree: usize, scale: GridScale) -> Result<KGrid> {
    let base = match scale {
        GridScale::Length => train
            .series_length()
            .ok_or_else(|| Error::Data("empty training set".into()))?,
        GridScale::Rows => train.len(),
    };
    k_grid(base, degree)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub candidates: Vec<usize>,
    /// Mean misclassification rate over folds, per candidate.
    pub mean_errors: Vec<f64>,
    pub chosen_k: usize,
    /// Number of folds actually used.
    pub folds: usize,
}

/// Fold count usable with these labels: `requested`, lowered to the
/// smallest class size when that class could not appear in every fold.
pub fn effective_folds(labels: &[usize], num_classes: usize, requested: usize) -> Result<usize> {
    if requested < 2 {
        return Err(Error::Param(format!("cross-validation needs at least 2 folds, got {requested}")));
    }
    let mut counts = vec![0usize; num_classes.max(1)];
    for &l in labels {
        counts[l] += 1;
    }
    let minority = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
    if minority >= requested {
        return Ok(requested);
    }
    if minority < 2 {
        return Err(Error::Data(format!(
            "a class has {minority} instance(s); stratified cross-validation needs at least 2"
        )));
    }
    log::warn!("smallest class has {minority} instances; reducing folds from {requested} to {minority}");
    Ok(minority)
}

/// Stratified partition of `0..labels.len()` into `q` test folds. Each class
/// is shuffled with a seeded RNG and dealt round-robin, continuing the deal
/// across classes so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[usize], num_classes: usize, q: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); q];
    let mut next = 0;
    for u in 0..num_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == u).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[next % q].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Mean fold misclassification rate of `model` on features `x`.
pub fn cv_error(
    x: ArrayView2<f64>,
    labels: &[usize],
    num_classes: usize,
    folds: &[Vec<usize>],
    model: &ModelSpec,
    seed: u64,
) -> Result<f64> {
    let n = labels.len();
    let mut in_test = vec![usize::MAX; n];
    for (f, idx) in folds.iter().enumerate() {
        for &i in idx {
            in_test[i] = f;
        }
    }
    let mut total = 0.0;
    for (f, test_idx) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = (0..n).filter(|&i| in_test[i] != f).collect();
        let x_train = x.select(ndarray::Axis(0), &train_idx);
        let y_train: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
        let fitted = model
            .with_seed(derive_seed(seed, f as u64))
            .fit(x_train.view(), &y_train, num_classes)?;
        let x_test = x.select(ndarray::Axis(0), test_idx);
        let predicted = fitted.predict(x_test.view())?;
        let wrong = predicted.iter().zip(test_idx).filter(|(p, &i)| **p != labels[i]).count();
        total += wrong as f64 / test_idx.len() as f64;
    }
    Ok(total / folds.len() as f64)
}

/// Cross-validates every candidate `K` for one degree and keeps the one
/// with the lowest mean error (the smallest such `K` on ties).
pub fn select_k(
    train: &LabeledDataset,
    degree: usize,
    grid: &KGrid,
    folds: usize,
    model: &ModelSpec,
    seed: u64,
) -> Result<CvResult> {
    let domain = train.domain().ok_or_else(|| Error::Data("empty training set".into()))?;
    let q = effective_folds(train.labels(), train.num_classes(), folds)?;
    let partition = stratified_folds(train.labels(), train.num_classes(), q, seed);

    let mean_errors = grid
        .candidates()
        .par_iter()
        .map(|&k| {
            let spec = BasisSpec::clamped_uniform(domain, k, degree)?;
            let coefs = smooth_dataset(train, &spec)?;
            cv_error(
                coefs.entries().view(),
                train.labels(),
                train.num_classes(),
                &partition,
                model,
                seed,
            )
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for (i, e) in mean_errors.iter().enumerate() {
        if *e < mean_errors[best] {
            best = i;
        }
    }
    log::debug!(
        "degree {degree}: cv errors {:?} -> K = {}",
        grid.candidates().iter().zip(&mean_errors).collect::<Vec<_>>(),
        grid.candidates()[best]
    );
    Ok(CvResult {
        candidates: grid.candidates().to_vec(),
        mean_errors,
        chosen_k: grid.candidates()[best],
        folds: q,
    })
}
