use ndarray::ArrayView2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{check_training_shape, grow_class_tree, ClassTree, GrowConfig, TreeParams};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub num_trees: usize,
    /// Candidate features per split; `None` means `⌈√K⌉`.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            num_trees: 100,
            mtry: None,
            bootstrap: true,
            tree: TreeParams::default(),
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, num_features: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| (num_features as f64).sqrt().ceil() as usize)
            .max(1)
    }

    pub fn validate(&self, num_features: usize) -> Result<()> {
        self.tree.validate()?;
        if self.num_trees < 1 {
            return Err(Error::Param("a forest needs at least one tree".into()));
        }
        if let Some(m) = self.mtry {
            if m < 1 || m > num_features {
                return Err(Error::Param(format!("mtry {m} outside 1..={num_features}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<ClassTree>,
    num_classes: usize,
    num_features: usize,
}

impl ForestModel {
    /// Each tree draws its bootstrap sample and split candidates from its own
    /// RNG stream seeded by `(seed, tree index)`, so the result does not
    /// depend on how trees are scheduled across threads.
    pub fn fit(x: ArrayView2<f64>, labels: &[usize], num_classes: usize, params: &ForestParams) -> Result<Self> {
        params.validate(x.ncols())?;
        check_training_shape(x, labels)?;
        let n = labels.len();
        let config = GrowConfig {
            max_depth: params.tree.max_depth,
            min_samples_split: params.tree.min_samples_split,
            mtry: Some(params.resolved_mtry(x.ncols()).min(x.ncols())),
        };
        let trees = (0..params.num_trees)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, b as u64));
                let rows: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                grow_class_tree(x, labels, num_classes, &rows, &config, Some(&mut rng))
            })
            .collect();
        Ok(Self {
            trees,
            num_classes,
            num_features: x.ncols(),
        })
    }

    pub fn trees(&self) -> &[ClassTree] {
        &self.trees
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Majority vote over trees, lowest label on ties.
    pub fn predict_row(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.num_classes];
        for t in &self.trees {
            votes[t.predict_row(x)] += 1;
        }
        super::tree::argmax_lowest(&votes)
    }
}
