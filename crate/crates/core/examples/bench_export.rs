//! Runs a small benchmark over two datasets and two learners, writes the
//! report files, and exports the smoothed curves of one training instance.

use std::path::PathBuf;

use fnvote::bench::{export_representations, run_benchmark, BenchConfig, DatasetEntry};
use fnvote::classifiers::ModelKind;
use fnvote::data::{load_ucr, Delimiter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let data = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ucr"));
    let out = std::env::temp_dir().join("fnvote_bench");

    let datasets = ["Coffee", "GunPoint"]
        .iter()
        .map(|name| DatasetEntry {
            name: name.to_string(),
            train: data.join(format!("{name}_TRAIN.tsv")),
            test: data.join(format!("{name}_TEST.tsv")),
        })
        .collect();
    let mut config = BenchConfig::new(datasets, vec![ModelKind::Tree, ModelKind::Knn]);
    config.degrees = vec![3, 5, 7];
    config.folds = 5;
    config.output_dir = Some(out.clone());

    let report = run_benchmark(&config)?;
    print!("{}", report.accuracy_csv());
    println!("reports written to {}", out.display());

    let coffee = load_ucr(data.join("Coffee_TRAIN.tsv"), Delimiter::Auto)?;
    let files = export_representations(&coffee, &[3, 7, 11], 0, None, out.join("curves"))?;
    println!("exported {} curve files", files.len());
    Ok(())
}
