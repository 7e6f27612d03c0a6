//! Cross-validates the number of basis functions for each degree and
//! prints the error curve over the candidate grid.

use std::path::PathBuf;

use fnvote::classifiers::{ModelKind, ModelSpec};
use fnvote::data::{binarize, load_ucr, Delimiter};
use fnvote::selection::{k_grid_for, select_k, GridScale};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ucr"));
    let train = binarize(&load_ucr(dir.join("Coffee_TRAIN.tsv"), Delimiter::Auto)?)?;
    let model = ModelSpec::default_for(ModelKind::Knn);

    for degree in [3, 7] {
        let grid = k_grid_for(&train, degree, GridScale::Length)?;
        let cv = select_k(&train, degree, &grid, 5, &model, 42)?;
        println!("degree {degree} ({} folds): chosen K = {}", cv.folds, cv.chosen_k);
        for (k, err) in cv.candidates.iter().zip(&cv.mean_errors) {
            println!("  K={k:<4} error {err:.4}");
        }
    }
    Ok(())
}
