//! Gradient boosting with logistic loss. Prints the test accuracy of the
//! staged score after selected rounds.

use std::path::PathBuf;

use fnvote::basis::{smooth_dataset, BasisSpec};
use fnvote::classifiers::boost::{BoostModel, BoostParams};
use fnvote::data::{binarize, load_ucr, Delimiter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ucr"));
    let train = binarize(&load_ucr(dir.join("GunPoint_TRAIN.tsv"), Delimiter::Auto)?)?;
    let test = binarize(&load_ucr(dir.join("GunPoint_TEST.tsv"), Delimiter::Auto)?)?;

    let spec = BasisSpec::clamped_uniform(train.domain().unwrap(), 20, 5)?;
    let x_train = smooth_dataset(&train, &spec)?;
    let x_test = smooth_dataset(&test, &spec)?;

    let params = BoostParams { num_rounds: 150, subsample: 0.8, seed: 3, ..BoostParams::default() };
    let model = BoostModel::fit(x_train.entries().view(), train.labels(), 2, &params)?;
    println!("initial score {:.4}", model.initial_score());

    let staged: Vec<Vec<f64>> = x_test.entries().rows().into_iter().map(|r| model.staged_decision(&r.to_vec())).collect();
    for round in [1, 10, 50, 100, 150] {
        let correct = staged
            .iter()
            .zip(test.labels())
            .filter(|(s, &y)| usize::from(s[round] >= 0.0) == y)
            .count();
        println!("round {round:>3}: accuracy {:.4}", correct as f64 / test.len() as f64);
    }
    Ok(())
}
