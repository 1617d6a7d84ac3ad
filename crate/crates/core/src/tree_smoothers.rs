//! Squared-loss regression trees grown best-first under a leaf budget, and
//! unbagged ensembles of them.
//!
//! Each node draws its candidate features from a ChaCha stream keyed on
//! `(seed, node id)`. Features that are constant inside the node are skipped
//! without counting toward the `max_features` budget. Because node ids and
//! split order do not depend on the budget, a tree grown with `L` leaves is
//! exactly the first `L − 1` splits of the same tree grown with more; see
//! [`RegressionTree::truncate`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::smoother::{Smoother, SmootherWeights};

/// Per-feature rank codes of a training matrix, shared by every tree fitted
/// on the same inputs.
#[derive(Debug, Clone)]
pub struct FeatureIndex<T> {
    n: usize,
    d: usize,
    /// `codes[f * n + i]` is the rank of `x[i, f]` among the distinct values of feature `f`.
    codes: Vec<u32>,
    /// Sorted distinct values of each feature.
    values: Vec<Vec<T>>,
}

impl<T: Real> FeatureIndex<T> {
    pub fn new(x: &Matrix<T>) -> Result<Self> {
        let (n, d) = x.shape();
        if n == 0 || d == 0 {
            return Err(Error::Argument("cannot index an empty design".into()));
        }
        if !x.is_finite() {
            return Err(Error::Argument("tree inputs contain non-finite values".into()));
        }
        let mut codes = vec![0u32; n * d];
        let mut values = Vec::with_capacity(d);
        let mut order: Vec<usize> = (0..n).collect();
        for f in 0..d {
            let col = x.column(f);
            order.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).unwrap().then(a.cmp(&b)));
            let mut distinct: Vec<T> = Vec::new();
            for &i in &order {
                if distinct.last() != Some(&col[i]) {
                    distinct.push(col[i]);
                }
                codes[f * n + i] = (distinct.len() - 1) as u32;
            }
            values.push(distinct);
        }
        Ok(Self { n, d, codes, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    fn codes(&self, f: usize) -> &[u32] {
        &self.codes[f * self.n..(f + 1) * self.n]
    }
}

/// Default candidate-feature count per node: `⌊√d⌋`, at least 1.
pub fn default_max_features(d: usize) -> usize {
    ((d as f64).sqrt().floor() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeOptions {
    pub max_leaves: usize,
    /// Features examined per node; `None` means `⌊√d⌋`.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl TreeOptions {
    pub fn new(max_leaves: usize, seed: u64) -> Self {
        Self {
            max_leaves,
            max_features: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split<T> {
    pub feature: usize,
    pub threshold: T,
    pub left: usize,
    pub right: usize,
    /// Position of this split in the best-first growth order.
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct TreeNode<T> {
    /// Range of this node's samples in [`RegressionTree::sample_order`].
    pub start: usize,
    pub end: usize,
    /// Mean training target of the node.
    pub value: T,
    pub split: Option<Split<T>>,
}

#[derive(Debug, Clone)]
pub struct RegressionTree<T> {
    nodes: Vec<TreeNode<T>>,
    /// Training indices arranged so that every node owns a contiguous range.
    sample_order: Vec<u32>,
    /// Node id of each leaf, in depth-first (left before right) order.
    leaves: Vec<usize>,
    /// Leaf number of each training sample.
    train_leaf: Vec<u32>,
    d: usize,
    max_leaves: usize,
    max_features: usize,
    seed: u64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate<T> {
    gain: T,
    feature: usize,
    code: u32,
    threshold: T,
}

impl<T: Real> Candidate<T> {
    fn beats(&self, other: &Option<Candidate<T>>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.gain > o.gain
                    || (self.gain == o.gain
                        && (self.feature < o.feature
                            || (self.feature == o.feature && self.threshold < o.threshold)))
            }
        }
    }
}

struct Frontier<T> {
    gain: f64,
    node: usize,
    cand: Candidate<T>,
}

impl<T> PartialEq for Frontier<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Frontier<T> {}
impl<T> PartialOrd for Frontier<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Frontier<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Larger gain first; among equal gains the older node.
        self.gain
            .total_cmp(&other.gain)
            .then(other.node.cmp(&self.node))
    }
}

struct Searcher<'a, T> {
    index: &'a FeatureIndex<T>,
    y: &'a [T],
    max_features: usize,
    seed: u64,
    counts: Vec<u32>,
    sums: Vec<T>,
    pairs: Vec<(u32, T)>,
    features: Vec<usize>,
}

impl<'a, T: Real> Searcher<'a, T> {
    fn best_split(&mut self, node_id: usize, samples: &[u32]) -> Option<Candidate<T>> {
        let m = samples.len();
        if m < 2 {
            return None;
        }
        let first = self.y[samples[0] as usize];
        if samples.iter().all(|&i| self.y[i as usize] == first) {
            return None;
        }
        let total: T = samples.iter().map(|&i| self.y[i as usize]).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(node_id as u64);
        let d = self.index.d;
        self.features.clear();
        self.features.extend(0..d);
        let mut best: Option<Candidate<T>> = None;
        let mut visited = 0;
        // Lazy Fisher-Yates: position k receives a uniformly chosen remaining feature.
        for k in 0..d {
            let pick = rng.random_range(k..d);
            self.features.swap(k, pick);
            let f = self.features[k];
            if let Some(c) = self.search_feature(f, samples, total) {
                visited += 1;
                if c.beats(&best) {
                    best = Some(c);
                }
                if visited == self.max_features {
                    break;
                }
            }
        }
        best
    }

    /// Best threshold on feature `f`, or `None` when `f` is constant in the node.
    fn search_feature(&mut self, f: usize, samples: &[u32], total: T) -> Option<Candidate<T>> {
        let codes = self.index.codes(f);
        let (mut lo, mut hi) = (u32::MAX, 0u32);
        for &i in samples {
            let c = codes[i as usize];
            lo = lo.min(c);
            hi = hi.max(c);
        }
        if lo == hi {
            return None;
        }
        let m = samples.len();
        let span = (hi - lo + 1) as usize;
        let values = &self.index.values[f];
        let n_total = T::from_usize_lossy(m);
        let mut best: Option<Candidate<T>> = None;
        let mut consider = |n_left: usize, s_left: T, code: u32, next_code: u32| {
            let nl = T::from_usize_lossy(n_left);
            let nr = n_total - nl;
            let s_right = total - s_left;
            let diff = s_left / nl - s_right / nr;
            let gain = nl * nr / n_total * diff * diff;
            let a = values[code as usize];
            let b = values[next_code as usize];
            let mut threshold = (a + b) / T::lit(2.0);
            if threshold >= b {
                threshold = a;
            }
            let cand = Candidate {
                gain,
                feature: f,
                code,
                threshold,
            };
            if cand.beats(&best) {
                best = Some(cand);
            }
        };
        if span <= 2 * m {
            if self.counts.len() < span {
                self.counts.resize(span, 0);
                self.sums.resize(span, T::zero());
            }
            self.counts[..span].fill(0);
            self.sums[..span].fill(T::zero());
            for &i in samples {
                let c = (codes[i as usize] - lo) as usize;
                self.counts[c] += 1;
                self.sums[c] += self.y[i as usize];
            }
            let (mut n_left, mut s_left) = (0usize, T::zero());
            let mut prev: Option<usize> = None;
            for c in 0..span {
                if self.counts[c] == 0 {
                    continue;
                }
                if let Some(p) = prev {
                    consider(n_left, s_left, lo + p as u32, lo + c as u32);
                }
                n_left += self.counts[c] as usize;
                s_left += self.sums[c];
                prev = Some(c);
            }
        } else {
            self.pairs.clear();
            self.pairs
                .extend(samples.iter().map(|&i| (codes[i as usize], self.y[i as usize])));
            self.pairs.sort_by_key(|p| p.0);
            let (mut n_left, mut s_left) = (0usize, T::zero());
            for k in 0..m {
                n_left += 1;
                s_left += self.pairs[k].1;
                if k + 1 < m && self.pairs[k + 1].0 != self.pairs[k].0 {
                    consider(n_left, s_left, self.pairs[k].0, self.pairs[k + 1].0);
                }
            }
        }
        best
    }
}

impl<T: Real> RegressionTree<T> {
    /// Fits a tree on raw inputs; see [`RegressionTree::fit_indexed`].
    pub fn fit(x: &Matrix<T>, y: &[T], max_leaves: usize, seed: u64) -> Result<Self> {
        Self::fit_indexed(&FeatureIndex::new(x)?, y, &TreeOptions::new(max_leaves, seed))
    }

    /// Best-first growth: repeatedly split the frontier leaf whose best
    /// candidate split removes the most squared error, until the budget is
    /// reached or no leaf admits a split with positive gain.
    pub fn fit_indexed(index: &FeatureIndex<T>, y: &[T], opts: &TreeOptions) -> Result<Self> {
        let n = index.n;
        if y.len() != n {
            return Err(Error::Consistency(format!(
                "{n} indexed rows but {} targets",
                y.len()
            )));
        }
        if opts.max_leaves == 0 {
            return Err(Error::Argument("max_leaves must be at least 1".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("tree targets contain non-finite values".into()));
        }
        let max_features = opts
            .max_features
            .unwrap_or_else(|| default_max_features(index.d))
            .clamp(1, index.d);
        let mut searcher = Searcher {
            index,
            y,
            max_features,
            seed: opts.seed,
            counts: Vec::new(),
            sums: Vec::new(),
            pairs: Vec::new(),
            features: Vec::with_capacity(index.d),
        };
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mean = |s: &[u32]| {
            s.iter().map(|&i| y[i as usize]).sum::<T>() / T::from_usize_lossy(s.len())
        };
        let mut nodes = vec![TreeNode {
            start: 0,
            end: n,
            value: mean(&order),
            split: None,
        }];
        let mut heap = BinaryHeap::new();
        let push = |heap: &mut BinaryHeap<Frontier<T>>, node: usize, cand: Option<Candidate<T>>| {
            if let Some(c) = cand {
                if c.gain > T::zero() {
                    heap.push(Frontier {
                        gain: c.gain.to_f64_lossy(),
                        node,
                        cand: c,
                    });
                }
            }
        };
        let root = searcher.best_split(0, &order);
        push(&mut heap, 0, root);
        let mut leaves = 1;
        let mut scratch: Vec<u32> = Vec::with_capacity(n);
        while leaves < opts.max_leaves {
            let Some(top) = heap.pop() else { break };
            let (start, end) = (nodes[top.node].start, nodes[top.node].end);
            let codes = index.codes(top.cand.feature);
            // Stable partition keeps sample order deterministic.
            scratch.clear();
            let mut write = start;
            for k in start..end {
                let i = order[k];
                if codes[i as usize] <= top.cand.code {
                    order[write] = i;
                    write += 1;
                } else {
                    scratch.push(i);
                }
            }
            order[write..end].copy_from_slice(&scratch);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(TreeNode {
                start,
                end: write,
                value: mean(&order[start..write]),
                split: None,
            });
            nodes.push(TreeNode {
                start: write,
                end,
                value: mean(&order[write..end]),
                split: None,
            });
            nodes[top.node].split = Some(Split {
                feature: top.cand.feature,
                threshold: top.cand.threshold,
                left,
                right,
                rank: leaves - 1,
            });
            leaves += 1;
            let cl = searcher.best_split(left, &order[start..write]);
            push(&mut heap, left, cl);
            let cr = searcher.best_split(right, &order[write..end]);
            push(&mut heap, right, cr);
        }
        Ok(Self::assemble(
            nodes,
            order,
            index.d,
            opts.max_leaves,
            max_features,
            opts.seed,
        ))
    }

    fn assemble(
        nodes: Vec<TreeNode<T>>,
        sample_order: Vec<u32>,
        d: usize,
        max_leaves: usize,
        max_features: usize,
        seed: u64,
    ) -> Self {
        let mut leaves = Vec::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match &nodes[id].split {
                Some(s) => {
                    stack.push(s.right);
                    stack.push(s.left);
                }
                None => leaves.push(id),
            }
        }
        let mut train_leaf = vec![0u32; sample_order.len()];
        for (l, &id) in leaves.iter().enumerate() {
            for &i in &sample_order[nodes[id].start..nodes[id].end] {
                train_leaf[i as usize] = l as u32;
            }
        }
        Self {
            nodes,
            sample_order,
            leaves,
            train_leaf,
            d,
            max_leaves,
            max_features,
            seed,
        }
    }

    /// The same tree stopped after `max_leaves − 1` splits. Equal to refitting
    /// with the smaller budget.
    pub fn truncate(&self, max_leaves: usize) -> Self {
        let cut = max_leaves.max(1) - 1;
        let mut nodes: Vec<TreeNode<T>> = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(0usize, usize::MAX, false)];
        // Copy reachable nodes, relinking children to their new positions.
        while let Some((old, parent, is_left)) = stack.pop() {
            let mut node = self.nodes[old].clone();
            let id = nodes.len();
            if parent != usize::MAX {
                let s = nodes[parent].split.as_mut().expect("parent is a split");
                if is_left {
                    s.left = id;
                } else {
                    s.right = id;
                }
            }
            match node.split {
                Some(s) if s.rank < cut => {
                    stack.push((s.right, id, false));
                    stack.push((s.left, id, true));
                }
                _ => node.split = None,
            }
            nodes.push(node);
        }
        Self::assemble(
            nodes,
            self.sample_order.clone(),
            self.d,
            max_leaves,
            self.max_features,
            self.seed,
        )
    }

    pub fn nodes(&self) -> &[TreeNode<T>] {
        &self.nodes
    }

    pub fn n_train(&self) -> usize {
        self.sample_order.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn max_leaves(&self) -> usize {
        self.max_leaves
    }

    pub fn max_features(&self) -> usize {
        self.max_features
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of splits made during growth (`n_leaves − 1`).
    pub fn n_splits(&self) -> usize {
        self.leaves.len() - 1
    }

    /// Training indices in leaf `l`.
    pub fn leaf_members(&self, l: usize) -> &[u32] {
        let node = &self.nodes[self.leaves[l]];
        &self.sample_order[node.start..node.end]
    }

    pub fn leaf_size(&self, l: usize) -> usize {
        let node = &self.nodes[self.leaves[l]];
        node.end - node.start
    }

    /// Mean training target of leaf `l`.
    pub fn leaf_value(&self, l: usize) -> T {
        self.nodes[self.leaves[l]].value
    }

    /// Leaf number of training sample `i`.
    pub fn train_leaf(&self, i: usize) -> usize {
        self.train_leaf[i] as usize
    }

    pub fn train_leaves(&self) -> &[u32] {
        &self.train_leaf
    }

    fn leaf_node(&self, x: &[T]) -> usize {
        let mut id = 0;
        while let Some(s) = &self.nodes[id].split {
            id = if x[s.feature] <= s.threshold {
                s.left
            } else {
                s.right
            };
        }
        id
    }

    /// Leaf number reached by input `x`.
    pub fn leaf_of(&self, x: &[T]) -> usize {
        let node = self.leaf_node(x);
        self.leaves
            .binary_search_by(|&probe| {
                // Leaves are in depth-first order, which matches node start offsets.
                self.nodes[probe].start.cmp(&self.nodes[node].start)
            })
            .expect("leaf node is listed")
    }

    fn check(&self, x: &Matrix<T>) -> Result<()> {
        if x.cols() != self.d {
            return Err(Error::Argument(format!(
                "inputs have {} columns, tree expects {}",
                x.cols(),
                self.d
            )));
        }
        Ok(())
    }

    pub fn leaf_indices(&self, x: &Matrix<T>) -> Result<Vec<usize>> {
        self.check(x)?;
        Ok(x.row_iter().map(|r| self.leaf_of(r)).collect())
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        self.check(x)?;
        Ok(x.row_iter().map(|r| self.nodes[self.leaf_node(r)].value).collect())
    }

    /// Fitted values on the training set.
    pub fn train_predictions(&self) -> Vec<T> {
        self.train_leaf
            .iter()
            .map(|&l| self.leaf_value(l as usize))
            .collect()
    }

    /// `ŝ(x₀)`: `1/n_l` on the members of x₀'s leaf, 0 elsewhere.
    pub fn weights_tree(&self, x0: &[T]) -> Result<SmootherWeights<T>> {
        if x0.len() != self.d {
            return Err(Error::Argument(format!(
                "input has {} entries, tree expects {}",
                x0.len(),
                self.d
            )));
        }
        let mut w = vec![T::zero(); self.n_train()];
        self.add_leaf_weights(self.leaf_of(x0), T::one(), &mut w);
        Ok(SmootherWeights::new(w))
    }

    /// Adds `scale / n_l` to the entries of leaf `l`'s members.
    pub fn add_leaf_weights(&self, l: usize, scale: T, out: &mut [T]) {
        let members = self.leaf_members(l);
        let v = scale / T::from_usize_lossy(members.len());
        for &i in members {
            out[i as usize] += v;
        }
    }
}

impl<T: Real> Smoother<T> for RegressionTree<T> {
    fn n_train(&self) -> usize {
        self.sample_order.len()
    }

    fn predict(&self, inputs: &Matrix<T>) -> Result<Vec<T>> {
        RegressionTree::predict(self, inputs)
    }

    fn weight_matrix(&self, inputs: &Matrix<T>) -> Result<Matrix<T>> {
        let leaves = self.leaf_indices(inputs)?;
        let mut out = Matrix::zeros(inputs.rows(), self.n_train());
        for (r, &l) in leaves.iter().enumerate() {
            self.add_leaf_weights(l, T::one(), out.row_mut(r));
        }
        Ok(out)
    }

    fn label(&self) -> String {
        format!("tree(leaves={})", self.n_leaves())
    }
}

/// Average of trees fitted on the full data with seeds `base_seed + 1, …`.
#[derive(Debug, Clone)]
pub struct TreeEnsemble<T> {
    trees: Vec<RegressionTree<T>>,
}

impl<T: Real> TreeEnsemble<T> {
    pub fn fit(
        x: &Matrix<T>,
        y: &[T],
        max_leaves: usize,
        p_ens: usize,
        base_seed: u64,
    ) -> Result<Self> {
        Self::fit_indexed(&FeatureIndex::new(x)?, y, max_leaves, None, p_ens, base_seed)
    }

    pub fn fit_indexed(
        index: &FeatureIndex<T>,
        y: &[T],
        max_leaves: usize,
        max_features: Option<usize>,
        p_ens: usize,
        base_seed: u64,
    ) -> Result<Self> {
        if p_ens == 0 {
            return Err(Error::Argument("p_ens must be at least 1".into()));
        }
        let trees = (1..=p_ens as u64)
            .into_par_iter()
            .map(|m| {
                RegressionTree::fit_indexed(
                    index,
                    y,
                    &TreeOptions {
                        max_leaves,
                        max_features,
                        seed: base_seed.wrapping_add(m),
                    },
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { trees })
    }

    pub fn from_trees(trees: Vec<RegressionTree<T>>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::Argument("an ensemble needs at least one tree".into()));
        }
        Ok(Self { trees })
    }

    pub fn trees(&self) -> &[RegressionTree<T>] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        let mut acc = vec![T::zero(); x.rows()];
        for t in &self.trees {
            for (a, p) in acc.iter_mut().zip(t.predict(x)?) {
                *a += p;
            }
        }
        let k = T::from_usize_lossy(self.trees.len());
        Ok(acc.into_iter().map(|a| a / k).collect())
    }

    /// `(1/P^ens) Σ_m ŝ_m(x₀)`.
    pub fn weights_ensemble(&self, x0: &[T]) -> Result<SmootherWeights<T>> {
        let w = self.weight_matrix(&Matrix::from_vec(1, x0.len(), x0.to_vec()))?;
        Ok(SmootherWeights::new(w.into_vec()))
    }
}

impl<T: Real> Smoother<T> for TreeEnsemble<T> {
    fn n_train(&self) -> usize {
        self.trees[0].n_train()
    }

    fn predict(&self, inputs: &Matrix<T>) -> Result<Vec<T>> {
        TreeEnsemble::predict(self, inputs)
    }

    fn weight_matrix(&self, inputs: &Matrix<T>) -> Result<Matrix<T>> {
        let scale = T::one() / T::from_usize_lossy(self.trees.len());
        let mut out = Matrix::zeros(inputs.rows(), self.n_train());
        for t in &self.trees {
            for (r, l) in t.leaf_indices(inputs)?.into_iter().enumerate() {
                t.add_leaf_weights(l, scale, out.row_mut(r));
            }
        }
        Ok(out)
    }

    fn label(&self) -> String {
        format!("forest(trees={})", self.trees.len())
    }
}
