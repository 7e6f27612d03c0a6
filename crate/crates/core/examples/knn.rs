//! Nearest-neighbor classification on smoothed GunPoint curves.
//!
//! Pass a directory holding `GunPoint_TRAIN.tsv` and `GunPoint_TEST.tsv`
//! as the first argument; the bundled data directory is used otherwise.

use std::path::PathBuf;

use fnvote::basis::{smooth_dataset, BasisSpec};
use fnvote::bench::evaluate_accuracy;
use fnvote::classifiers::knn::KnnParams;
use fnvote::classifiers::{knn_predict, predict, train_knn};
use fnvote::data::{binarize, load_ucr, Delimiter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ucr"));
    let train = binarize(&load_ucr(dir.join("GunPoint_TRAIN.tsv"), Delimiter::Auto)?)?;
    let test = binarize(&load_ucr(dir.join("GunPoint_TEST.tsv"), Delimiter::Auto)?)?;

    let spec = BasisSpec::clamped_uniform(train.domain().unwrap(), 20, 3)?;
    let x_train = smooth_dataset(&train, &spec)?;
    let x_test = smooth_dataset(&test, &spec)?;

    for neighbors in [1, 3, 5, 9] {
        let params = KnnParams { neighbors, ..KnnParams::default() };
        let model = train_knn(&x_train, train.labels(), &params)?;
        let pred = predict(&model, x_test.entries().view())?;
        println!("h={neighbors}: accuracy {:.4}", evaluate_accuracy(&pred, test.labels())?);
    }

    let model = train_knn(&x_train, train.labels(), &KnnParams::default())?;
    let first = x_test.entries().row(0).to_vec();
    println!("first test curve -> class {} (truth {})", knn_predict(&model, &first)?, test.labels()[0]);
    Ok(())
}
