//! Pairwise disagreement between ensemble members.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::ensemble::PredictionMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Jaccard distance between the sets of rows predicted positive.
    #[default]
    Jaccard,
    /// Fraction of rows on which two members differ.
    Disagreement,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jaccard" => Ok(Metric::Jaccard),
            "disagreement" => Ok(Metric::Disagreement),
            other => Err(Error::Param(format!(
                "unknown metric {other:?} (expected jaccard or disagreement)"
            ))),
        }
    }
}

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("prediction vectors of length {} and {}", a.len(), b.len())));
    }
    Ok(())
}

/// `1 − |A ∩ B| / |A ∪ B|` where `A` and `B` are the indices predicted 1.
/// Two empty sets are at distance 0.
pub fn jaccard_distance(a: &[usize], b: &[usize]) -> Result<f64> {
    check_lengths(a, b)?;
    if let Some(&bad) = a.iter().chain(b).find(|&&v| v > 1) {
        return Err(Error::Label(format!("Jaccard distance needs binary predictions, found {bad}")));
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        inter += usize::from(x == 1 && y == 1);
        union += usize::from(x == 1 || y == 1);
    }
    if union == 0 {
        return Ok(0.0);
    }
    Ok(1.0 - inter as f64 / union as f64)
}

pub fn disagreement_rate(a: &[usize], b: &[usize]) -> Result<f64> {
    check_lengths(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let differ = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(differ as f64 / a.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityMatrix {
    pub labels: Vec<String>,
    pub values: Array2<f64>,
    /// Mean over the `O(O − 1)` off-diagonal entries; 0 for a single member.
    pub mean_off_diagonal: f64,
}

impl DiversityMatrix {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[[a, b]]
    }

    /// Distance between the members with the given labels, if both exist.
    pub fn between(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[[i, j]])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("member");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(self.values.rows()) {
            out.push_str(l);
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn diversity_matrix(f: &PredictionMatrix, metric: Metric) -> Result<DiversityMatrix> {
    let o = f.num_members();
    let columns: Vec<Vec<usize>> = (0..o).map(|j| f.column(j)).collect();
    let mut values = Array2::zeros((o, o));
    let mut total = 0.0;
    for a in 0..o {
        for b in a + 1..o {
            let d = match metric {
                Metric::Jaccard => jaccard_distance(&columns[a], &columns[b])?,
                Metric::Disagreement => disagreement_rate(&columns[a], &columns[b])?,
            };
            values[[a, b]] = d;
            values[[b, a]] = d;
            total += 2.0 * d;
        }
    }
    // a single member still has to pass the label check
    if o == 1 && metric == Metric::Jaccard {
        jaccard_distance(&columns[0], &columns[0])?;
    }
    let pairs = o * o.saturating_sub(1);
    Ok(DiversityMatrix {
        labels: f.members().to_vec(),
        values,
        mean_off_diagonal: if pairs == 0 { 0.0 } else { total / pairs as f64 },
    })
}
