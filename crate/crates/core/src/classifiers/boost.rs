//! Gradient boosting of regression trees under logistic loss.
//!
//! The score starts at the log-odds of the positive-class prior. Each round
//! fits a squared-error regression tree to the pseudo-residuals
//! `y − σ(F)`, sets each leaf to one Newton step
//! `Σ (y − p) / Σ p (1 − p)`, and adds the tree scaled by the learning rate.

use ndarray::ArrayView2;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hist::{grow_hist_tree, BinnedFeatures};
use super::tree::{check_training_shape, RegTree};
use crate::error::{Error, Result};

/// Floor on the Newton-step denominator.
const HESSIAN_FLOOR: f64 = 1e-12;

/// Score used for single-class training data, `logit(1 − 1e-12)`.
const SATURATED_LOGIT: f64 = 27.631021115928547;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostParams {
    pub num_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub subsample: f64,
    pub loss: Loss,
    /// Bins per feature for split search, at most 256. Features with fewer
    /// distinct values than this are searched exactly.
    pub max_bins: usize,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            num_rounds: 100,
            learning_rate: 0.1,
            max_depth: 3,
            subsample: 1.0,
            loss: Loss::Logistic,
            max_bins: 256,
            seed: 0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Param(format!(
                "learning rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::Param(format!("subsample must lie in (0, 1], got {}", self.subsample)));
        }
        if self.max_depth < 1 {
            return Err(Error::Param("max_depth must be at least 1".into()));
        }
        if !(2..=256).contains(&self.max_bins) {
            return Err(Error::Param(format!("max_bins must lie in [2, 256], got {}", self.max_bins)));
        }
        Ok(())
    }
}

pub fn sigmoid(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    initial_score: f64,
    learning_rate: f64,
    trees: Vec<RegTree>,
    num_features: usize,
}

impl BoostModel {
    pub fn fit(x: ArrayView2<f64>, labels: &[usize], num_classes: usize, params: &BoostParams) -> Result<Self> {
        params.validate()?;
        check_training_shape(x, labels)?;
        if num_classes > 2 || labels.iter().any(|&l| l > 1) {
            return Err(Error::Label(format!(
                "gradient boosting needs binary labels, got {num_classes} classes"
            )));
        }
        let n = labels.len();
        let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
        let positives = y.iter().sum::<f64>();
        let num_features = x.ncols();

        if positives == 0.0 || positives == n as f64 {
            let initial_score = if positives == 0.0 { -SATURATED_LOGIT } else { SATURATED_LOGIT };
            return Ok(Self {
                initial_score,
                learning_rate: params.learning_rate,
                trees: Vec::new(),
                num_features,
            });
        }

        let prior = positives / n as f64;
        let initial_score = (prior / (1.0 - prior)).ln();
        let mut score = vec![initial_score; n];
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let sample_size = ((params.subsample * n as f64).floor() as usize).clamp(1, n);
        let binned = BinnedFeatures::new(x, params.max_bins);
        let all_rows: Vec<usize> = (0..n).collect();
        let dense = x.as_standard_layout();
        let mut trees = Vec::with_capacity(params.num_rounds);
        for _ in 0..params.num_rounds {
            let p: Vec<f64> = score.iter().map(|&f| sigmoid(f)).collect();
            let resid: Vec<f64> = y.iter().zip(&p).map(|(yi, pi)| yi - pi).collect();
            let sampled;
            let rows = if sample_size < n {
                let mut r = index::sample(&mut rng, n, sample_size).into_vec();
                r.sort_unstable();
                sampled = r;
                &sampled
            } else {
                &all_rows
            };
            let tree = grow_hist_tree(&binned, &resid, rows, params.max_depth, |idx| {
                let num: f64 = idx.iter().map(|&i| resid[i]).sum();
                let den: f64 = idx.iter().map(|&i| p[i] * (1.0 - p[i])).sum();
                num / den.max(HESSIAN_FLOOR)
            });
            for (s, row) in score.iter_mut().zip(dense.rows()) {
                *s += params.learning_rate * tree.predict_row(row.as_slice().expect("standard layout"));
            }
            trees.push(tree);
        }
        Ok(Self {
            initial_score,
            learning_rate: params.learning_rate,
            trees,
            num_features,
        })
    }

    pub fn initial_score(&self) -> f64 {
        self.initial_score
    }

    pub fn trees(&self) -> &[RegTree] {
        &self.trees
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Raw score `F(x)` after all rounds.
    pub fn decision_function(&self, x: &[f64]) -> f64 {
        self.initial_score + self.learning_rate * self.trees.iter().map(|t| t.predict_row(x)).sum::<f64>()
    }

    /// Score after each round; element 0 is the initial score.
    pub fn staged_decision(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.initial_score;
        let mut out = Vec::with_capacity(self.trees.len() + 1);
        out.push(f);
        for t in &self.trees {
            f += self.learning_rate * t.predict_row(x);
            out.push(f);
        }
        out
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        usize::from(sigmoid(self.decision_function(x)) >= 0.5)
    }
}
