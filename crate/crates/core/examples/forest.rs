//! Random forest on degree-7 coefficients, comparing a few forest sizes.

use std::path::PathBuf;

use fnvote::basis::{smooth_dataset, BasisSpec};
use fnvote::bench::evaluate_accuracy;
use fnvote::classifiers::forest::ForestParams;
use fnvote::classifiers::{predict, train_forest};
use fnvote::data::{binarize, load_ucr, Delimiter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ucr"));
    let train = binarize(&load_ucr(dir.join("GunPoint_TRAIN.tsv"), Delimiter::Auto)?)?;
    let test = binarize(&load_ucr(dir.join("GunPoint_TEST.tsv"), Delimiter::Auto)?)?;

    let spec = BasisSpec::clamped_uniform(train.domain().unwrap(), 24, 7)?;
    let (x_train, x_test) = (smooth_dataset(&train, &spec)?, smooth_dataset(&test, &spec)?);

    for num_trees in [1, 10, 50, 200] {
        let params = ForestParams { num_trees, seed: 11, ..ForestParams::default() };
        let model = train_forest(&x_train, train.labels(), &params)?;
        let acc = evaluate_accuracy(&predict(&model, x_test.entries().view())?, test.labels())?;
        println!("{num_trees:>3} trees: {acc:.4}");
    }
    Ok(())
}
