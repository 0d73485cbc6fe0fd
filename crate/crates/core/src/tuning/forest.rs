use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per split.
    pub m_try: usize,
    /// Nodes with fewer samples are not split.
    pub min_node_size: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 500, m_try: 3, min_node_size: 5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub enum Node<F = f64> {
    Leaf { positives: usize, total: usize },
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: F, left: usize, right: usize },
}

/// Nodes in creation order; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Tree<F = f64> {
    pub nodes: Vec<Node<F>>,
}

impl<F: Scalar> Tree<F> {
    /// Positive fraction of the leaf reached by `x`.
    pub fn leaf_fraction(&self, x: &[F]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { positives, total } => return *positives as f64 / *total as f64,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go<F>(nodes: &[Node<F>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Forest<F = f64> {
    pub n_features: usize,
    pub trees: Vec<Tree<F>>,
    pub m_try: usize,
    pub min_node_size: usize,
    /// Per-tree bootstrap seeds.
    pub seeds: Vec<u64>,
    /// Out-of-bag accuracy; `None` when no sample was ever out of bag.
    pub oob_accuracy: Option<f64>,
    /// Fraction of positive training labels.
    pub positive_rate: f64,
}

impl<F: Scalar> Forest<F> {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Mean over trees of the reached leaf's positive fraction.
    pub fn predict_proba(&self, x: &[F]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, found: x.len() });
        }
        if self.trees.is_empty() {
            return Ok(self.positive_rate);
        }
        Ok(self.trees.iter().map(|t| t.leaf_fraction(x)).sum::<f64>() / self.trees.len() as f64)
    }

    /// Trained on a single class.
    pub fn is_constant(&self) -> bool {
        self.positive_rate == 0.0 || self.positive_rate == 1.0
    }

    /// Out-of-bag accuracy beats always predicting the majority class.
    pub fn is_informative(&self) -> bool {
        !self.is_constant()
            && self.oob_accuracy.is_some_and(|a| a > self.positive_rate.max(1.0 - self.positive_rate))
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Grower<'a, F> {
    x: &'a [Vec<F>],
    y: &'a [bool],
    m_try: usize,
    min_node_size: usize,
    nodes: Vec<Node<F>>,
}

impl<F: Scalar> Grower<'_, F> {
    /// Best (weighted child impurity, feature, threshold) among `m_try`
    /// features that admit a split; zero-gain splits are allowed.
    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, F)> {
        let d = self.x[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(rng);
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i]).count();
        let mut best: Option<(f64, usize, F)> = None;
        let mut tried = 0;
        let mut sorted = idx.to_vec();
        for f in features {
            if tried == self.m_try {
                break;
            }
            sorted.sort_by(|&a, &b| self.x[a][f].partial_cmp(&self.x[b][f]).unwrap_or(std::cmp::Ordering::Equal));
            if self.x[sorted[0]][f] == self.x[sorted[n - 1]][f] {
                continue;
            }
            tried += 1;
            let mut left_pos = 0;
            for k in 1..n {
                left_pos += self.y[sorted[k - 1]] as usize;
                let (lo, hi) = (self.x[sorted[k - 1]][f], self.x[sorted[k]][f]);
                if lo == hi {
                    continue;
                }
                let score = k as f64 * gini(left_pos, k) + (n - k) as f64 * gini(total_pos - left_pos, n - k);
                if best.as_ref().is_none_or(|b| score < b.0) {
                    let mut t = (lo + hi) / F::of(2.0);
                    // midpoint may round up to `hi` in low precision
                    if t >= hi {
                        t = lo;
                    }
                    best = Some((score, f, t));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, rng: &mut ChaCha8Rng) -> usize {
        let id = self.nodes.len();
        let positives = idx.iter().filter(|&&i| self.y[i]).count();
        self.nodes.push(Node::Leaf { positives, total: idx.len() });
        if positives == 0 || positives == idx.len() || idx.len() < self.min_node_size {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx, rng) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, rng);
        let right = self.grow(r, rng);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
}

fn check_data<F: Scalar>(x: &[Vec<F>], y: &[bool]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptySample);
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let d = x[0].len();
    if d == 0 {
        return Err(Error::InvalidArgument("feature rows are empty".into()));
    }
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: r.len() });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite feature value".into()));
    }
    Ok(d)
}

/// Bagged Gini CART trees. Deterministic for a fixed seed regardless of
/// thread count.
pub fn train_forest<F: Scalar>(x: &[Vec<F>], y: &[bool], params: &ForestParams) -> Result<Forest<F>> {
    let d = check_data(x, y)?;
    if params.n_trees == 0 || params.m_try == 0 {
        return Err(Error::InvalidArgument("n_trees and m_try must be positive".into()));
    }
    let n = x.len();
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let seeds: Vec<u64> = (0..params.n_trees).map(|_| master.gen()).collect();
    let m_try = params.m_try.min(d);

    let grown: Vec<(Tree<F>, Vec<bool>)> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut in_bag = vec![false; n];
            let idx: Vec<usize> = (0..n)
                .map(|_| {
                    let i = rng.gen_range(0..n);
                    in_bag[i] = true;
                    i
                })
                .collect();
            let mut g = Grower { x, y, m_try, min_node_size: params.min_node_size, nodes: Vec::new() };
            g.grow(idx, &mut rng);
            (Tree { nodes: g.nodes }, in_bag)
        })
        .collect();

    let mut votes = vec![(0f64, 0usize); n];
    for (tree, in_bag) in &grown {
        for i in (0..n).filter(|&i| !in_bag[i]) {
            votes[i].0 += tree.leaf_fraction(&x[i]);
            votes[i].1 += 1;
        }
    }
    let scored: Vec<bool> = (0..n)
        .filter(|&i| votes[i].1 > 0)
        .map(|i| (votes[i].0 / votes[i].1 as f64 >= 0.5) == y[i])
        .collect();
    let oob_accuracy =
        (!scored.is_empty()).then(|| scored.iter().filter(|&&c| c).count() as f64 / scored.len() as f64);

    Ok(Forest {
        n_features: d,
        trees: grown.into_iter().map(|(t, _)| t).collect(),
        m_try,
        min_node_size: params.min_node_size,
        seeds,
        oob_accuracy,
        positive_rate: y.iter().filter(|&&b| b).count() as f64 / n as f64,
    })
}
