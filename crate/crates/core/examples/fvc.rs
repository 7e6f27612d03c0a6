//! End to end: train the voting ensemble, save and reload it, then compare
//! each member's test accuracy with the vote.

use std::path::PathBuf;

use fnvote::bench::evaluate_accuracy;
use fnvote::classifiers::{ModelKind, ModelSpec};
use fnvote::data::{binarize, load_ucr, Delimiter};
use fnvote::ensemble::{train_fvc, FvcConfig, FvcModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ucr"));
    let train = binarize(&load_ucr(dir.join("GunPoint_TRAIN.tsv"), Delimiter::Auto)?)?;
    let test = binarize(&load_ucr(dir.join("GunPoint_TEST.tsv"), Delimiter::Auto)?)?;

    let mut config = FvcConfig::new(ModelSpec::default_for(ModelKind::Tree));
    config.folds = 5;
    let model = train_fvc(&train, &config)?;

    let path = std::env::temp_dir().join("gunpoint_tree.fvc");
    model.save(&path)?;
    let model = FvcModel::load(&path)?;

    let f = model.predict_matrix(&test)?;
    for (o, member) in model.members().iter().enumerate() {
        let acc = evaluate_accuracy(&f.column(o), test.labels())?;
        println!("{} K={:<3} accuracy {acc:.4}", member.label(), member.cv.as_ref().map_or(0, |cv| cv.chosen_k));
    }
    println!("vote      accuracy {:.4}", evaluate_accuracy(&model.predict(&test)?, test.labels())?);
    Ok(())
}
