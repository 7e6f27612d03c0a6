//! Greedy top-down binary trees over coefficient features.
//!
//! Every split thresholds one feature: rows with `x[feature] < threshold`
//! go left. Candidate thresholds are midpoints between consecutive distinct
//! values in the node. Classification trees use Gini impurity; the
//! regression variant (used by boosting) uses squared error.
//!
//! Each feature is sorted once per fit; nodes own a contiguous range of every
//! feature's sorted order, and a split stably partitions those ranges, so a
//! tree level costs `O(n · K)` rather than `O(n · K · log n)`.

use ndarray::ArrayView2;
use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 10,
            min_samples_split: 2,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::Param("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node<L> {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Unnormalized impurity decrease `n·I(node) − n_L·I(L) − n_R·I(R)`.
        improvement: f64,
    },
    Leaf(L),
}

/// Binary tree stored in pre-order; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<L> {
    nodes: Vec<Node<L>>,
    num_features: usize,
    /// Number of (weighted) training rows at the root.
    num_samples: usize,
}

impl<L> Tree<L> {
    pub(crate) fn from_parts(nodes: Vec<Node<L>>, num_features: usize, num_samples: usize) -> Self {
        Self {
            nodes,
            num_features,
            num_samples,
        }
    }

    pub fn nodes(&self) -> &[Node<L>] {
        &self.nodes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn depth(&self) -> usize {
        fn go<L>(nodes: &[Node<L>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(_) => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[*feature] < *threshold { *left } else { *right },
            }
        }
    }

    pub fn leaf(&self, x: &[f64]) -> &L {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf(l) => l,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Total improvement per feature, normalized to sum to 1. A tree with no
    /// informative split gets uniform importances.
    pub fn feature_importance(&self) -> Vec<f64> {
        let k = self.num_features;
        let mut imp = vec![0.0; k];
        for node in &self.nodes {
            if let Node::Split {
                feature, improvement, ..
            } = node
            {
                imp[*feature] += improvement.max(0.0);
            }
        }
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            imp.iter_mut().for_each(|v| *v /= total);
        } else if k > 0 {
            imp.iter_mut().for_each(|v| *v = 1.0 / k as f64);
        }
        imp
    }
}

/// Class-count leaves; predicts the majority class, lowest label on ties.
pub type ClassTree = Tree<Vec<usize>>;

impl ClassTree {
    pub fn predict_row(&self, x: &[f64]) -> usize {
        argmax_lowest(self.leaf(x))
    }
}

pub(crate) fn argmax_lowest(counts: &[usize]) -> usize {
    let mut best = 0;
    for (u, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = u;
        }
    }
    best
}

/// Regression leaves holding a fitted value.
pub type RegTree = Tree<f64>;

impl RegTree {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        *self.leaf(x)
    }
}

/// Class labels indexed by sample position.
pub(crate) struct Target {
    labels: Vec<usize>,
    num_classes: usize,
}

pub(crate) struct GrowConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features examined per node; `None` means all.
    pub mtry: Option<usize>,
}

struct Grower<'a, 'r> {
    cols: &'a [Vec<f64>],
    order: Vec<Vec<u32>>,
    scratch: Vec<u32>,
    goes_left: Vec<bool>,
    target: Target,
    config: &'a GrowConfig,
    rng: Option<&'r mut ChaCha8Rng>,
    nodes: Vec<Node<(usize, usize)>>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    improvement: f64,
}

impl Grower<'_, '_> {
    fn n_features(&self) -> usize {
        self.cols.len()
    }

    fn is_pure(&self, lo: usize, hi: usize) -> bool {
        let positions = &self.order[0][lo..hi];
        let labels = &self.target.labels;
        let first = labels[positions[0] as usize];
        positions.iter().all(|&p| labels[p as usize] == first)
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let k = self.n_features();
        match (self.config.mtry, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < k => {
                let mut f = index::sample(rng, k, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..k).collect(),
        }
    }

    fn best_split(&self, lo: usize, hi: usize, features: &[usize]) -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        let n = (hi - lo) as f64;
        let (labels, z) = (&self.target.labels, self.target.num_classes);
        let mut total = vec![0.0f64; z];
        for &p in &self.order[0][lo..hi] {
            total[labels[p as usize]] += 1.0;
        }
        let parent = total.iter().map(|c| c * c).sum::<f64>() / n;
        let mut left = vec![0.0f64; z];
        for &f in features {
            left.iter_mut().for_each(|c| *c = 0.0);
            let ord = &self.order[f][lo..hi];
            let col = &self.cols[f];
            for i in 0..ord.len() - 1 {
                let p = ord[i] as usize;
                left[labels[p]] += 1.0;
                let v = col[p];
                let v_next = col[ord[i + 1] as usize];
                if !(v < v_next) {
                    continue;
                }
                let nl = (i + 1) as f64;
                let nr = n - nl;
                let mut sl = 0.0;
                let mut sr = 0.0;
                for u in 0..z {
                    sl += left[u] * left[u];
                    let r = total[u] - left[u];
                    sr += r * r;
                }
                let improvement = sl / nl + sr / nr - parent;
                if best.as_ref().is_none_or(|b| improvement > b.improvement) {
                    best = Some(Candidate {
                        feature: f,
                        threshold: midpoint(v, v_next),
                        improvement,
                    });
                }
            }
        }
        best
    }

    fn partition(&mut self, lo: usize, hi: usize, split: &Candidate) -> usize {
        let col = &self.cols[split.feature];
        for &p in &self.order[0][lo..hi] {
            self.goes_left[p as usize] = col[p as usize] < split.threshold;
        }
        let mut n_left = 0;
        for ord in &mut self.order {
            self.scratch.clear();
            let seg = &mut ord[lo..hi];
            let mut w = 0;
            for i in 0..seg.len() {
                let p = seg[i];
                if self.goes_left[p as usize] {
                    seg[w] = p;
                    w += 1;
                } else {
                    self.scratch.push(p);
                }
            }
            seg[w..].copy_from_slice(&self.scratch);
            n_left = w;
        }
        lo + n_left
    }

    fn grow(&mut self, lo: usize, hi: usize, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf((lo, hi)));
        let n = hi - lo;
        if depth >= self.config.max_depth || n < self.config.min_samples_split || n < 2 || self.is_pure(lo, hi) {
            return id;
        }
        let features = self.candidate_features();
        let Some(split) = self.best_split(lo, hi, &features) else {
            return id;
        };
        let mid = self.partition(lo, hi, &split);
        debug_assert!(mid > lo && mid < hi);
        let left = self.grow(lo, mid, depth + 1);
        let right = self.grow(mid, hi, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            improvement: split.improvement,
        };
        id
    }
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

/// Feature columns gathered for a list of rows, with each column's sample
/// positions sorted by value (ties by position).
struct Presorted {
    cols: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
    len: usize,
}

impl Presorted {
    /// `rows` may repeat, as in a bootstrap sample.
    fn new(x: ArrayView2<f64>, rows: &[usize]) -> Self {
        let n = rows.len();
        let cols: Vec<Vec<f64>> = (0..x.ncols())
            .map(|f| {
                let c = x.column(f);
                rows.iter().map(|&r| c[r]).collect()
            })
            .collect();
        let mut order: Vec<Vec<u32>> = cols
            .iter()
            .map(|col| {
                let mut o: Vec<u32> = (0..n as u32).collect();
                o.sort_unstable_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                o
            })
            .collect();
        if order.is_empty() {
            order.push((0..n as u32).collect());
        }
        Self { cols, order, len: n }
    }
}

/// Grows a tree and returns it with each leaf's sample positions.
fn grow_raw(
    pre: &Presorted,
    target: Target,
    config: &GrowConfig,
    rng: Option<&mut ChaCha8Rng>,
) -> (Vec<Node<(usize, usize)>>, Vec<u32>) {
    let n = pre.len;
    let mut g = Grower {
        cols: &pre.cols,
        order: pre.order.clone(),
        scratch: Vec::with_capacity(n),
        goes_left: vec![false; n],
        target,
        config,
        rng,
        nodes: Vec::new(),
    };
    g.grow(0, n, 0);
    let positions = g.order.swap_remove(0);
    (g.nodes, positions)
}

fn map_leaves<L>(raw: Vec<Node<(usize, usize)>>, mut leaf: impl FnMut(&[u32]) -> L, positions: &[u32]) -> Vec<Node<L>> {
    raw.into_iter()
        .map(|node| match node {
            Node::Leaf((lo, hi)) => Node::Leaf(leaf(&positions[lo..hi])),
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
        .collect()
}

pub(crate) fn grow_class_tree(
    x: ArrayView2<f64>,
    labels: &[usize],
    num_classes: usize,
    rows: &[usize],
    config: &GrowConfig,
    rng: Option<&mut ChaCha8Rng>,
) -> ClassTree {
    let pos_labels: Vec<usize> = rows.iter().map(|&r| labels[r]).collect();
    let target = Target {
        labels: pos_labels.clone(),
        num_classes,
    };
    let (raw, positions) = grow_raw(&Presorted::new(x, rows), target, config, rng);
    let nodes = map_leaves(
        raw,
        |ps| {
            let mut counts = vec![0; num_classes];
            for &p in ps {
                counts[pos_labels[p as usize]] += 1;
            }
            counts
        },
        &positions,
    );
    Tree {
        nodes,
        num_features: x.ncols(),
        num_samples: rows.len(),
    }
}

pub(crate) fn check_training_shape(x: ArrayView2<f64>, labels: &[usize]) -> Result<()> {
    if x.nrows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Data("cannot train on zero rows".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("features contain non-finite values".into()));
    }
    Ok(())
}

/// Fits a Gini classification tree on all rows.
pub fn train_class_tree(x: ArrayView2<f64>, labels: &[usize], num_classes: usize, params: &TreeParams) -> Result<ClassTree> {
    params.validate()?;
    check_training_shape(x, labels)?;
    let rows: Vec<usize> = (0..labels.len()).collect();
    let config = GrowConfig {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        mtry: None,
    };
    Ok(grow_class_tree(x, labels, num_classes, &rows, &config, None))
}
