//! Base classifiers over basis-coefficient features.
//!
//! All four learners take an `N × K` coefficient matrix and integer class
//! codes, and return a [`BaseModel`] that maps any `K`-wide feature row to a
//! class code.

pub mod boost;
pub mod forest;
mod hist;
pub mod knn;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use boost::{BoostModel, BoostParams, Loss};
pub use forest::{ForestModel, ForestParams};
pub use knn::{KnnModel, KnnParams, Weighting};
pub use tree::{ClassTree, Node, RegTree, Tree, TreeParams};

use crate::basis::CoefficientMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tree,
    Knn,
    Forest,
    Boost,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Tree, ModelKind::Knn, ModelKind::Forest, ModelKind::Boost];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Tree => "tree",
            ModelKind::Knn => "knn",
            ModelKind::Forest => "forest",
            ModelKind::Boost => "boost",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(ModelKind::Tree),
            "knn" => Ok(ModelKind::Knn),
            "forest" => Ok(ModelKind::Forest),
            "boost" => Ok(ModelKind::Boost),
            other => Err(Error::Param(format!(
                "unknown model {other:?} (expected tree, knn, forest or boost)"
            ))),
        }
    }
}

/// A learner together with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ModelSpec {
    Tree(TreeParams),
    Knn(KnnParams),
    Forest(ForestParams),
    Boost(BoostParams),
}

impl ModelSpec {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Tree => ModelSpec::Tree(TreeParams::default()),
            ModelKind::Knn => ModelSpec::Knn(KnnParams::default()),
            ModelKind::Forest => ModelSpec::Forest(ForestParams::default()),
            ModelKind::Boost => ModelSpec::Boost(BoostParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Tree(_) => ModelKind::Tree,
            ModelSpec::Knn(_) => ModelKind::Knn,
            ModelSpec::Forest(_) => ModelKind::Forest,
            ModelSpec::Boost(_) => ModelKind::Boost,
        }
    }

    /// Copy with the random seed replaced; deterministic learners are
    /// returned unchanged.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            ModelSpec::Forest(p) => ModelSpec::Forest(ForestParams { seed, ..*p }),
            ModelSpec::Boost(p) => ModelSpec::Boost(BoostParams { seed, ..*p }),
            other => other.clone(),
        }
    }

    pub fn fit(&self, x: ArrayView2<f64>, labels: &[usize], num_classes: usize) -> Result<BaseModel> {
        Ok(match self {
            ModelSpec::Tree(p) => BaseModel::Tree(tree::train_class_tree(x, labels, num_classes, p)?),
            ModelSpec::Knn(p) => BaseModel::Knn(KnnModel::fit(x, labels, num_classes, *p)?),
            ModelSpec::Forest(p) => BaseModel::Forest(ForestModel::fit(x, labels, num_classes, p)?),
            ModelSpec::Boost(p) => BaseModel::Boost(BoostModel::fit(x, labels, num_classes, p)?),
        })
    }
}

/// A trained classifier of any variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "state", rename_all = "lowercase")]
pub enum BaseModel {
    Tree(ClassTree),
    Knn(KnnModel),
    Forest(ForestModel),
    Boost(BoostModel),
}

impl BaseModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            BaseModel::Tree(_) => ModelKind::Tree,
            BaseModel::Knn(_) => ModelKind::Knn,
            BaseModel::Forest(_) => ModelKind::Forest,
            BaseModel::Boost(_) => ModelKind::Boost,
        }
    }

    pub fn num_features(&self) -> usize {
        match self {
            BaseModel::Tree(t) => t.num_features(),
            BaseModel::Knn(m) => m.num_features(),
            BaseModel::Forest(m) => m.num_features(),
            BaseModel::Boost(m) => m.num_features(),
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        match self {
            BaseModel::Tree(t) => t.predict_row(x),
            BaseModel::Knn(m) => m.predict_row(x),
            BaseModel::Forest(m) => m.predict_row(x),
            BaseModel::Boost(m) => m.predict_row(x),
        }
    }

    /// One label per row of `features`.
    pub fn predict(&self, features: ArrayView2<f64>) -> Result<Vec<usize>> {
        if features.ncols() != self.num_features() {
            return Err(Error::Shape(format!(
                "model was trained on {} features, got {}",
                self.num_features(),
                features.ncols()
            )));
        }
        let dense = features.as_standard_layout();
        let rows: Vec<&[f64]> = dense.rows().into_iter().map(|r| r.to_slice().expect("standard layout")).collect();
        Ok(rows.par_iter().map(|r| self.predict_row(r)).collect())
    }
}

fn infer_classes(labels: &[usize]) -> usize {
    labels.iter().max().map_or(1, |m| m + 1).max(2)
}

pub fn train_tree(features: &CoefficientMatrix, labels: &[usize], params: &TreeParams) -> Result<BaseModel> {
    ModelSpec::Tree(*params).fit(features.entries().view(), labels, infer_classes(labels))
}

pub fn train_knn(features: &CoefficientMatrix, labels: &[usize], params: &KnnParams) -> Result<BaseModel> {
    ModelSpec::Knn(*params).fit(features.entries().view(), labels, infer_classes(labels))
}

pub fn train_forest(features: &CoefficientMatrix, labels: &[usize], params: &ForestParams) -> Result<BaseModel> {
    ModelSpec::Forest(*params).fit(features.entries().view(), labels, infer_classes(labels))
}

pub fn train_boost(features: &CoefficientMatrix, labels: &[usize], params: &BoostParams) -> Result<BaseModel> {
    ModelSpec::Boost(*params).fit(features.entries().view(), labels, infer_classes(labels))
}

/// Gini importance of each coefficient for a tree model.
pub fn tree_variable_importance(model: &BaseModel) -> Result<Vec<f64>> {
    match model {
        BaseModel::Tree(t) => Ok(t.feature_importance()),
        other => Err(Error::Variant {
            expected: "tree",
            found: other.kind().as_str(),
        }),
    }
}

pub fn knn_predict(model: &BaseModel, query: &[f64]) -> Result<usize> {
    match model {
        BaseModel::Knn(m) => {
            if query.len() != m.num_features() {
                return Err(Error::Shape(format!(
                    "query has {} features, model expects {}",
                    query.len(),
                    m.num_features()
                )));
            }
            Ok(m.predict_row(query))
        }
        other => Err(Error::Variant {
            expected: "knn",
            found: other.kind().as_str(),
        }),
    }
}

pub fn predict(model: &BaseModel, features: ArrayView2<f64>) -> Result<Vec<usize>> {
    model.predict(features)
}
