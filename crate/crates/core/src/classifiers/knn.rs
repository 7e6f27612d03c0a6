use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    /// Number of neighbors.
    pub neighbors: usize,
    /// Minkowski exponent; 2 is Euclidean.
    pub exponent: f64,
    pub weighting: Weighting,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            neighbors: 5,
            exponent: 2.0,
            weighting: Weighting::Uniform,
        }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.neighbors < 1 {
            return Err(Error::Param("knn needs at least one neighbor".into()));
        }
        if !(self.exponent >= 1.0) || !self.exponent.is_finite() {
            return Err(Error::Param(format!("Minkowski exponent must be >= 1, got {}", self.exponent)));
        }
        Ok(())
    }
}

/// Memorized training coefficients and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    params: KnnParams,
    features: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

/// `Σ_j |a_j − b_j|^v`, the Minkowski distance before the final root.
/// Ranking by this is equivalent to ranking by the distance itself.
#[inline]
fn minkowski_pow(a: &[f64], b: &[f64], v: f64) -> f64 {
    if v == 2.0 {
        squared_euclidean(a, b)
    } else if v == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(v)).sum()
    }
}

/// Four independent partial sums let the compiler vectorize the loop.
#[inline]
fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let d = a[4 * c + l] - b[4 * c + l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0;
    for j in 4 * chunks..n {
        let d = a[j] - b[j];
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Minkowski distance of order `v`.
pub fn minkowski(a: &[f64], b: &[f64], v: f64) -> f64 {
    let s = minkowski_pow(a, b, v);
    if v == 1.0 {
        s
    } else if v == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / v)
    }
}

impl KnnModel {
    pub fn fit(x: ArrayView2<f64>, labels: &[usize], num_classes: usize, params: KnnParams) -> Result<Self> {
        params.validate()?;
        super::tree::check_training_shape(x, labels)?;
        if params.neighbors > labels.len() {
            return Err(Error::Param(format!(
                "knn asks for {} neighbors but only {} training rows exist",
                params.neighbors,
                labels.len()
            )));
        }
        Ok(Self {
            params,
            features: x.as_standard_layout().into_owned(),
            labels: labels.to_vec(),
            num_classes,
        })
    }

    pub fn params(&self) -> &KnnParams {
        &self.params
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Indices and distances of the `h` nearest training rows, nearest first;
    /// equal distances are ordered by training index.
    pub fn neighbors(&self, query: &[f64]) -> Vec<(usize, f64)> {
        let v = self.params.exponent;
        let k = self.features.ncols();
        let flat = self.features.as_slice().expect("features are stored in standard layout");
        let mut scored: Vec<(f64, usize)> = if k == 0 {
            (0..self.labels.len()).map(|i| (0.0, i)).collect()
        } else {
            flat.chunks_exact(k)
                .enumerate()
                .map(|(i, row)| (minkowski_pow(query, row, v), i))
                .collect()
        };
        let h = self.params.neighbors.min(scored.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if h < scored.len() {
            scored.select_nth_unstable_by(h - 1, cmp);
            scored.truncate(h);
        }
        scored.sort_unstable_by(cmp);
        scored
            .into_iter()
            .map(|(s, i)| {
                let d = if v == 1.0 {
                    s
                } else if v == 2.0 {
                    s.sqrt()
                } else {
                    s.powf(1.0 / v)
                };
                (i, d)
            })
            .collect()
    }

    pub fn predict_row(&self, query: &[f64]) -> usize {
        let nn = self.neighbors(query);
        let mut votes = vec![0.0f64; self.num_classes];
        match self.params.weighting {
            Weighting::Uniform => {
                for &(i, _) in &nn {
                    votes[self.labels[i]] += 1.0;
                }
            }
            Weighting::InverseDistance => {
                // exact matches take all the weight
                if nn.iter().any(|&(_, d)| d == 0.0) {
                    for &(i, d) in &nn {
                        if d == 0.0 {
                            votes[self.labels[i]] += 1.0;
                        }
                    }
                } else {
                    for &(i, d) in &nn {
                        votes[self.labels[i]] += 1.0 / d;
                    }
                }
            }
        }
        let mut best = 0;
        for u in 1..votes.len() {
            if votes[u] > votes[best] {
                best = u;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_neighbor_returns_matching_label() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [5.0, 5.0]];
        let m = KnnModel::fit(
            x.view(),
            &[0, 1, 0],
            2,
            KnnParams {
                neighbors: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.predict_row(&[1.0, 1.0]), 1);
        assert_eq!(m.predict_row(&[5.0, 5.0]), 0);
    }

    #[test]
    fn exponent_two_is_euclidean() {
        let a = [1.0, -2.0, 0.5];
        let b = [4.0, 2.0, 0.5];
        assert!((minkowski(&a, &b, 2.0) - 5.0).abs() < 1e-15);
        assert!((minkowski(&a, &b, 1.0) - 7.0).abs() < 1e-15);
        assert!((minkowski(&a, &b, 3.0) - (27.0f64 + 64.0).powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let x = array![[1.0], [-1.0], [1.0]];
        let m = KnnModel::fit(
            x.view(),
            &[1, 0, 0],
            2,
            KnnParams {
                neighbors: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.neighbors(&[0.0]), vec![(0, 1.0)]);
        assert_eq!(m.predict_row(&[0.0]), 1);
    }

    #[test]
    fn vote_ties_prefer_lower_label() {
        let x = array![[0.0], [1.0]];
        let m = KnnModel::fit(
            x.view(),
            &[1, 0],
            2,
            KnnParams {
                neighbors: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.predict_row(&[0.2]), 0);
    }

    #[test]
    fn inverse_distance_weighting() {
        let x = array![[0.0], [3.0], [3.5]];
        let params = KnnParams {
            neighbors: 3,
            exponent: 2.0,
            weighting: Weighting::InverseDistance,
        };
        let m = KnnModel::fit(x.view(), &[0, 1, 1], 2, params).unwrap();
        // weights 1/0.5 = 2 for class 0 vs 1/2.5 + 1/3 for class 1
        assert_eq!(m.predict_row(&[0.5]), 0);
        assert_eq!(m.predict_row(&[3.0]), 1);
    }

    #[test]
    fn parameter_errors() {
        let x = array![[0.0], [1.0]];
        let too_many = KnnParams {
            neighbors: 3,
            ..Default::default()
        };
        assert!(matches!(KnnModel::fit(x.view(), &[0, 1], 2, too_many), Err(Error::Param(_))));
        let bad_v = KnnParams {
            exponent: 0.5,
            ..Default::default()
        };
        assert!(matches!(KnnModel::fit(x.view(), &[0, 1], 2, bad_v), Err(Error::Param(_))));
    }
}
