//! Fits a Gini tree on B-spline coefficients and ranks the coefficients by
//! the impurity decrease they account for.

use std::path::PathBuf;

use fnvote::basis::{smooth_dataset, BasisSpec};
use fnvote::classifiers::tree::TreeParams;
use fnvote::classifiers::{train_tree, tree_variable_importance};
use fnvote::data::{binarize, load_ucr, Delimiter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ucr"));
    let train = binarize(&load_ucr(dir.join("GunPoint_TRAIN.tsv"), Delimiter::Auto)?)?;

    let spec = BasisSpec::clamped_uniform(train.domain().unwrap(), 15, 5)?;
    let coefs = smooth_dataset(&train, &spec)?;
    let model = train_tree(&coefs, train.labels(), &TreeParams { max_depth: 4, ..TreeParams::default() })?;

    let importance = tree_variable_importance(&model)?;
    let mut ranked: Vec<(usize, f64)> = importance.into_iter().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (k, share) in ranked.iter().take(5) {
        println!("c{k:<3} {share:.4}");
    }
    Ok(())
}
