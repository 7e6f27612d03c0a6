//! Diversity of a hand-written prediction matrix under both metrics.

use fnvote::diversity::{diversity_matrix, jaccard_distance, Metric};
use fnvote::ensemble::{majority_vote, PredictionMatrix};
use ndarray::array;

fn main() -> fnvote::Result<()> {
    // Rows are test curves, columns are ensemble members.
    let entries = array![
        [1, 1, 0],
        [1, 0, 0],
        [0, 1, 1],
        [1, 1, 1],
        [0, 0, 1],
        [0, 0, 0],
    ];
    let f = PredictionMatrix::new(entries, vec!["B3".into(), "B5".into(), "B7".into()])?;

    println!("vote: {:?}", majority_vote(&f, 2)?);
    println!("J(B3, B5) = {:.4}", jaccard_distance(&f.column(0), &f.column(1))?);
    for metric in [Metric::Jaccard, Metric::Disagreement] {
        let d = diversity_matrix(&f, metric)?;
        println!("{metric:?}, mean off-diagonal {:.4}\n{}", d.mean_off_diagonal, d.to_csv());
    }
    Ok(())
}
