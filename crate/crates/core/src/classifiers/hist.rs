//! Histogram-based regression trees for boosting.
//!
//! Every feature is cut into at most 256 bins once per fit. A node then
//! looks for its split among bin boundaries by scanning per-bin residual
//! sums, and a parent's histogram minus its smaller child's gives the
//! larger child's for free. When a feature has no more distinct values than
//! bins, each value gets its own bin and the candidate splits are the same
//! as an exhaustive search over sorted values.

use ndarray::ArrayView2;

use super::tree::{Node, RegTree, Tree};

/// Features quantized to bin indices, stored one column per feature.
pub(crate) struct BinnedFeatures {
    len: usize,
    bins: Vec<Vec<u8>>,
    /// `cuts[f][b]` separates bin `b` from bin `b + 1`: a value falls at or
    /// below bin `b` exactly when it is `< cuts[f][b]`.
    cuts: Vec<Vec<f64>>,
}

impl BinnedFeatures {
    pub(crate) fn new(x: ArrayView2<f64>, max_bins: usize) -> Self {
        debug_assert!((2..=256).contains(&max_bins));
        let n = x.nrows();
        let mut bins = Vec::with_capacity(x.ncols());
        let mut cuts = Vec::with_capacity(x.ncols());
        for col in x.columns() {
            let mut sorted: Vec<f64> = col.to_vec();
            sorted.sort_unstable_by(f64::total_cmp);
            let c = bin_edges(&sorted, max_bins);
            bins.push(col.iter().map(|&v| c.partition_point(|&t| t <= v) as u8).collect());
            cuts.push(c);
        }
        debug_assert!(n > 0);
        Self { len: n, bins, cuts }
    }

    pub(crate) fn num_features(&self) -> usize {
        self.bins.len()
    }
}

/// Cut points for one sorted column. With few distinct values every gap
/// gets a cut; otherwise cuts sit at evenly spaced ranks, skipping any rank
/// that falls inside a run of ties.
fn bin_edges(sorted: &[f64], max_bins: usize) -> Vec<f64> {
    let gaps: Vec<usize> = (1..sorted.len()).filter(|&i| sorted[i - 1] < sorted[i]).collect();
    let chosen: Vec<usize> = if gaps.len() < max_bins {
        gaps
    } else {
        let n = sorted.len();
        let mut out: Vec<usize> = Vec::with_capacity(max_bins - 1);
        for b in 1..max_bins {
            let rank = b * n / max_bins;
            // first gap at or after this rank
            let g = gaps.partition_point(|&i| i < rank);
            if let Some(&i) = gaps.get(g) {
                if out.last() != Some(&i) {
                    out.push(i);
                }
            }
        }
        out
    };
    chosen.into_iter().map(|i| midpoint(sorted[i - 1], sorted[i])).collect()
}

/// Threshold strictly above `lo` and at most `hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo / 2.0 + hi / 2.0;
    if m > lo && m <= hi {
        m
    } else {
        hi
    }
}

/// Per-feature bin sums for one node, laid out feature after feature.
#[derive(Clone)]
struct Histogram {
    sum: Vec<f64>,
    count: Vec<u32>,
}

impl Histogram {
    fn subtract(&self, other: &Histogram) -> Histogram {
        Histogram {
            sum: self.sum.iter().zip(&other.sum).map(|(a, b)| a - b).collect(),
            count: self.count.iter().zip(&other.count).map(|(a, b)| a - b).collect(),
        }
    }
}

struct Split {
    feature: usize,
    bin: usize,
    improvement: f64,
}

struct HistGrower<'a> {
    data: &'a BinnedFeatures,
    /// Start of each feature's block in a histogram.
    offsets: Vec<usize>,
    resid: &'a [f64],
    max_depth: usize,
    rows: Vec<u32>,
    scratch: Vec<u32>,
    nodes: Vec<Node<(usize, usize)>>,
}

impl HistGrower<'_> {
    fn histogram(&self, lo: usize, hi: usize) -> Histogram {
        let total = *self.offsets.last().unwrap();
        let mut h = Histogram {
            sum: vec![0.0; total],
            count: vec![0; total],
        };
        let rows = &self.rows[lo..hi];
        let g: Vec<f64> = rows.iter().map(|&r| self.resid[r as usize]).collect();
        for (f, col) in self.data.bins.iter().enumerate() {
            let (start, end) = (self.offsets[f], self.offsets[f + 1]);
            let sum = &mut h.sum[start..end];
            let count = &mut h.count[start..end];
            for (&r, &gi) in rows.iter().zip(&g) {
                let b = col[r as usize] as usize;
                sum[b] += gi;
                count[b] += 1;
            }
        }
        h
    }

    fn best_split(&self, h: &Histogram, n: usize) -> Option<Split> {
        let total: f64 = h.sum[self.offsets[0]..self.offsets[1]].iter().sum();
        let n = n as f64;
        let parent = total * total / n;
        let mut best: Option<Split> = None;
        for f in 0..self.data.num_features() {
            let (start, end) = (self.offsets[f], self.offsets[f + 1]);
            let mut sl = 0.0;
            let mut nl = 0u32;
            for b in 0..end - start - 1 {
                sl += h.sum[start + b];
                nl += h.count[start + b];
                if nl == 0 || h.count[start + b] == 0 {
                    continue;
                }
                let nlf = nl as f64;
                if nlf >= n {
                    break;
                }
                let sr = total - sl;
                let improvement = sl * sl / nlf + sr * sr / (n - nlf) - parent;
                if best.as_ref().is_none_or(|s| improvement > s.improvement) {
                    best = Some(Split { feature: f, bin: b, improvement });
                }
            }
        }
        best
    }

    fn partition(&mut self, lo: usize, hi: usize, split: &Split) -> usize {
        let col = &self.data.bins[split.feature];
        self.scratch.clear();
        let seg = &mut self.rows[lo..hi];
        let mut w = 0;
        for i in 0..seg.len() {
            let r = seg[i];
            if (col[r as usize] as usize) <= split.bin {
                seg[w] = r;
                w += 1;
            } else {
                self.scratch.push(r);
            }
        }
        seg[w..].copy_from_slice(&self.scratch);
        lo + w
    }

    fn is_pure(&self, lo: usize, hi: usize) -> bool {
        let first = self.resid[self.rows[lo] as usize];
        self.rows[lo..hi].iter().all(|&r| self.resid[r as usize] == first)
    }

    /// `hist` is this node's histogram when the parent already derived it.
    fn grow(&mut self, lo: usize, hi: usize, depth: usize, hist: Option<Histogram>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf((lo, hi)));
        let n = hi - lo;
        if depth >= self.max_depth || n < 2 || self.is_pure(lo, hi) {
            return id;
        }
        let hist = hist.unwrap_or_else(|| self.histogram(lo, hi));
        let Some(split) = self.best_split(&hist, n) else {
            return id;
        };
        let mid = self.partition(lo, hi, &split);
        debug_assert!(mid > lo && mid < hi);

        let (left_hist, right_hist) = if depth + 1 >= self.max_depth {
            (None, None)
        } else if mid - lo <= hi - mid {
            let small = self.histogram(lo, mid);
            let large = hist.subtract(&small);
            (Some(small), Some(large))
        } else {
            let small = self.histogram(mid, hi);
            let large = hist.subtract(&small);
            (Some(large), Some(small))
        };
        drop(hist);
        let left = self.grow(lo, mid, depth + 1, left_hist);
        let right = self.grow(mid, hi, depth + 1, right_hist);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: self.data.cuts[split.feature][split.bin],
            left,
            right,
            improvement: split.improvement,
        };
        id
    }
}

/// Squared-error regression tree on `resid` (indexed by row of the binned
/// matrix) grown on `rows`, which must be distinct. `leaf_value` receives
/// the rows of each leaf.
pub(crate) fn grow_hist_tree(
    data: &BinnedFeatures,
    resid: &[f64],
    rows: &[usize],
    max_depth: usize,
    mut leaf_value: impl FnMut(&[usize]) -> f64,
) -> RegTree {
    debug_assert_eq!(resid.len(), data.len);
    let mut offsets = Vec::with_capacity(data.num_features() + 1);
    offsets.push(0);
    for c in &data.cuts {
        offsets.push(offsets.last().unwrap() + c.len() + 1);
    }
    let mut g = HistGrower {
        data,
        offsets,
        resid,
        max_depth,
        rows: rows.iter().map(|&r| r as u32).collect(),
        scratch: Vec::with_capacity(rows.len()),
        nodes: Vec::new(),
    };
    if data.num_features() > 0 {
        g.grow(0, rows.len(), 0, None);
    } else {
        g.nodes.push(Node::Leaf((0, rows.len())));
    }
    let HistGrower { nodes, rows: order, .. } = g;
    let nodes = nodes
        .into_iter()
        .map(|node| match node {
            Node::Leaf((lo, hi)) => {
                let idx: Vec<usize> = order[lo..hi].iter().map(|&r| r as usize).collect();
                Node::Leaf(leaf_value(&idx))
            }
            Node::Split {
                feature,
                threshold,
                left,
                right,
                improvement,
            } => Node::Split {
                feature,
                threshold,
                left,
                right,
                improvement,
            },
        })
        .collect();
    Tree::from_parts(nodes, data.num_features(), rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn few_distinct_values_get_one_bin_each() {
        let x = array![[3.0], [1.0], [2.0], [1.0], [3.0]];
        let b = BinnedFeatures::new(x.view(), 256);
        assert_eq!(b.cuts[0], vec![1.5, 2.5]);
        assert_eq!(b.bins[0], vec![2, 0, 1, 0, 2]);
    }

    #[test]
    fn many_values_are_capped_and_ties_stay_together() {
        let x = Array2::from_shape_fn((1000, 1), |(i, _)| (i / 3) as f64);
        let b = BinnedFeatures::new(x.view(), 16);
        assert!(b.cuts[0].len() <= 15);
        assert!(b.cuts[0].windows(2).all(|w| w[0] < w[1]));
        for (i, &bin) in b.bins[0].iter().enumerate() {
            let v = x[[i, 0]];
            let below = b.cuts[0].iter().filter(|&&c| c <= v).count();
            assert_eq!(bin as usize, below);
        }
    }

    #[test]
    fn step_residuals_are_split_at_the_step() {
        let x = Array2::from_shape_fn((20, 2), |(i, j)| if j == 0 { i as f64 } else { (i % 3) as f64 });
        let resid: Vec<f64> = (0..20).map(|i| if i < 7 { -1.0 } else { 1.0 }).collect();
        let data = BinnedFeatures::new(x.view(), 256);
        let rows: Vec<usize> = (0..20).collect();
        let t = grow_hist_tree(&data, &resid, &rows, 1, |idx| idx.iter().map(|&i| resid[i]).sum::<f64>() / idx.len() as f64);
        match &t.nodes()[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((*feature, *threshold), (0, 6.5)),
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(t.predict_row(&[3.0, 0.0]), -1.0);
        assert_eq!(t.predict_row(&[12.0, 0.0]), 1.0);
    }
}
