//! Gradient boosting with squared loss, viewed as a smoother.
//!
//! Starting from `f₀ ≡ 0`, round `p` fits a tree `f̃_p` to the residuals
//! `y − f_{p−1}` and sets `f_p = f_{p−1} + η f̃_p`. Residuals are the squared
//! loss gradient without the ½ factor; any constant is absorbed into η.
//!
//! The weights follow the recursion
//!
//! ```text
//! ŝ_p(x₀) = ŝ_{p−1}(x₀) + η (ŝ_tree_p(x₀) − e_{l_p(x₀)} R̂_p)
//! ```
//!
//! where row `j` of `R̂_p` averages `ŝ_{p−1}(x_i)` over the training points in
//! leaf `j` of round `p`. Keeping every `R̂_p` lets the weights of any input be
//! rebuilt later; [`BoostedModel::fit_observed`] instead tracks the weights
//! of fixed evaluation sets during fitting and discards the corrections.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::smoother::{Smoother, SmootherWeights};
use crate::tree_smoothers::{FeatureIndex, RegressionTree, TreeOptions};

pub const DEFAULT_LEARNING_RATE: f64 = 0.85;
pub const DEFAULT_LEAF_BUDGET: usize = 10;
pub const DEFAULT_STOP_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub leaf_budget: usize,
    pub seed: u64,
    /// Stop once the mean squared training error falls below this value.
    pub stop_tol: Option<f64>,
    /// Features examined per node of each base tree; `None` means `⌊√d⌋`.
    pub max_features: Option<usize>,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            n_rounds: 100,
            learning_rate: DEFAULT_LEARNING_RATE,
            leaf_budget: DEFAULT_LEAF_BUDGET,
            seed: 0,
            stop_tol: None,
            max_features: None,
        }
    }
}

impl BoostConfig {
    fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::Argument("n_rounds must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Argument(format!(
                "learning rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.leaf_budget == 0 {
            return Err(Error::Argument("leaf budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Seed of the base tree in round `round` (1-based) of a model seeded with `seed`.
pub fn round_seed(seed: u64, round: usize) -> u64 {
    // SplitMix64 finalizer over the pair.
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(round as u64)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct BoostRound<T> {
    /// Base tree fitted to the residuals; its leaf values are the `γ_jp`.
    pub tree: RegressionTree<T>,
    /// `R̂_p` (leaves × n), present when the model keeps its corrections.
    pub correction: Option<Matrix<T>>,
}

#[derive(Debug, Clone)]
pub struct BoostedModel<T> {
    rounds: Vec<BoostRound<T>>,
    learning_rate: T,
    leaf_budget: usize,
    seed: u64,
    train_predictions: Vec<T>,
    train_mse: Vec<T>,
    /// Rows are `ŝ_P(x_i)` at the final round.
    train_weight_state: Option<Matrix<T>>,
    d: usize,
}

/// Snapshot handed to the observer after every round.
pub struct RoundView<'a, T> {
    /// 1-based round number.
    pub round: usize,
    pub train_mse: T,
    pub train_predictions: &'a [T],
    /// Predictions on each evaluation set.
    pub eval_predictions: &'a [Vec<T>],
    /// Training weight rows, when weights are tracked.
    pub train_weights: Option<&'a Matrix<T>>,
    /// Weight rows on each evaluation set, when weights are tracked.
    pub eval_weights: &'a [Matrix<T>],
}

/// Adds `η (H − R̂[l])` to every row of `w`, where `leaves[r]` is the row's leaf.
fn apply_round<T: Real>(
    w: &mut Matrix<T>,
    leaves: &[usize],
    tree: &RegressionTree<T>,
    correction: Option<&Matrix<T>>,
    eta: T,
) {
    for (r, &l) in leaves.iter().enumerate() {
        let row = w.row_mut(r);
        if let Some(c) = correction {
            for (v, &rc) in row.iter_mut().zip(c.row(l)) {
                *v -= eta * rc;
            }
        }
        tree.add_leaf_weights(l, eta, row);
    }
}

/// `R̂`: row `j` is the mean of the rows of `state` over leaf `j`'s members.
fn leaf_averages<T: Real>(state: &Matrix<T>, tree: &RegressionTree<T>) -> Matrix<T> {
    let n = state.cols();
    let mut r = Matrix::zeros(tree.n_leaves(), n);
    for l in 0..tree.n_leaves() {
        let members = tree.leaf_members(l);
        let inv = T::one() / T::from_usize_lossy(members.len());
        let dst = r.row_mut(l);
        for &i in members {
            for (d, &s) in dst.iter_mut().zip(state.row(i as usize)) {
                *d += s;
            }
        }
        for d in dst.iter_mut() {
            *d *= inv;
        }
    }
    r
}

impl<T: Real> BoostedModel<T> {
    /// Fits the model and keeps every correction matrix so that
    /// [`BoostedModel::weights_boost`] works for arbitrary inputs.
    pub fn fit(x: &Matrix<T>, y: &[T], cfg: &BoostConfig) -> Result<Self> {
        let index = FeatureIndex::new(x)?;
        Self::fit_inner(&index, y, cfg, &[], true, true, &mut |_| {})
    }

    pub fn fit_indexed(index: &FeatureIndex<T>, y: &[T], cfg: &BoostConfig) -> Result<Self> {
        Self::fit_inner(index, y, cfg, &[], true, true, &mut |_| {})
    }

    /// Fits without keeping corrections. When `track_weights` is set the
    /// weight rows of the training set and of every `eval` set are updated
    /// round by round and passed to `observer`; memory stays at
    /// `(n + Σ m_e) × n` however many rounds run.
    pub fn fit_observed(
        index: &FeatureIndex<T>,
        y: &[T],
        cfg: &BoostConfig,
        eval: &[&Matrix<T>],
        track_weights: bool,
        observer: &mut dyn FnMut(&RoundView<'_, T>),
    ) -> Result<Self> {
        Self::fit_inner(index, y, cfg, eval, track_weights, false, observer)
    }

    fn fit_inner(
        index: &FeatureIndex<T>,
        y: &[T],
        cfg: &BoostConfig,
        eval: &[&Matrix<T>],
        track_weights: bool,
        keep_corrections: bool,
        observer: &mut dyn FnMut(&RoundView<'_, T>),
    ) -> Result<Self> {
        cfg.validate()?;
        let n = index.n();
        if y.len() != n {
            return Err(Error::Consistency(format!(
                "{n} indexed rows but {} targets",
                y.len()
            )));
        }
        for e in eval {
            if e.cols() != index.dim() {
                return Err(Error::Argument(format!(
                    "evaluation inputs have {} columns, model expects {}",
                    e.cols(),
                    index.dim()
                )));
            }
        }
        let eta = T::lit(cfg.learning_rate);
        let nf = T::from_usize_lossy(n);
        let mut f = vec![T::zero(); n];
        let mut eval_pred: Vec<Vec<T>> = eval.iter().map(|e| vec![T::zero(); e.rows()]).collect();
        let weights_on = track_weights || keep_corrections;
        let mut state = weights_on.then(|| Matrix::zeros(n, n));
        let mut eval_w: Vec<Matrix<T>> = if track_weights {
            eval.iter().map(|e| Matrix::zeros(e.rows(), n)).collect()
        } else {
            Vec::new()
        };
        let mut rounds = Vec::new();
        let mut history = Vec::new();
        let mut residual = vec![T::zero(); n];
        for round in 1..=cfg.n_rounds {
            for ((r, &yi), &fi) in residual.iter_mut().zip(y).zip(&f) {
                *r = yi - fi;
            }
            let tree = RegressionTree::fit_indexed(
                index,
                &residual,
                &TreeOptions {
                    max_leaves: cfg.leaf_budget,
                    max_features: cfg.max_features,
                    seed: round_seed(cfg.seed, round),
                },
            )?;
            let train_leaves: Vec<usize> =
                tree.train_leaves().iter().map(|&l| l as usize).collect();
            for (fi, &l) in f.iter_mut().zip(&train_leaves) {
                *fi += eta * tree.leaf_value(l);
            }
            let eval_leaves: Vec<Vec<usize>> = eval
                .iter()
                .map(|e| tree.leaf_indices(e))
                .collect::<Result<_>>()?;
            for (pred, leaves) in eval_pred.iter_mut().zip(&eval_leaves) {
                for (p, &l) in pred.iter_mut().zip(leaves) {
                    *p += eta * tree.leaf_value(l);
                }
            }
            let mut correction = None;
            if let Some(s) = state.as_mut() {
                // R̂_1 = 0 because ŝ_0 ≡ 0.
                let r = (round > 1).then(|| leaf_averages(s, &tree));
                apply_round(s, &train_leaves, &tree, r.as_ref(), eta);
                for (w, leaves) in eval_w.iter_mut().zip(&eval_leaves) {
                    apply_round(w, leaves, &tree, r.as_ref(), eta);
                }
                if keep_corrections {
                    correction = Some(r.unwrap_or_else(|| Matrix::zeros(tree.n_leaves(), n)));
                }
            }
            let mse = y
                .iter()
                .zip(&f)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>()
                / nf;
            if !mse.is_finite() {
                return Err(Error::Numerical(format!(
                    "boosting diverged at round {round}"
                )));
            }
            history.push(mse);
            rounds.push(BoostRound { tree, correction });
            observer(&RoundView {
                round,
                train_mse: mse,
                train_predictions: &f,
                eval_predictions: &eval_pred,
                train_weights: state.as_ref(),
                eval_weights: &eval_w,
            });
            if cfg.stop_tol.is_some_and(|tol| mse.to_f64_lossy() < tol) {
                break;
            }
        }
        Ok(Self {
            rounds,
            learning_rate: eta,
            leaf_budget: cfg.leaf_budget,
            seed: cfg.seed,
            train_predictions: f,
            train_mse: history,
            train_weight_state: state,
            d: index.dim(),
        })
    }

    pub fn rounds(&self) -> &[BoostRound<T>] {
        &self.rounds
    }

    pub fn n_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn learning_rate(&self) -> T {
        self.learning_rate
    }

    pub fn leaf_budget(&self) -> usize {
        self.leaf_budget
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn train_predictions(&self) -> &[T] {
        &self.train_predictions
    }

    /// Mean squared training error after each round.
    pub fn train_mse_history(&self) -> &[T] {
        &self.train_mse
    }

    pub fn train_weight_state(&self) -> Option<&Matrix<T>> {
        self.train_weight_state.as_ref()
    }

    pub fn n_train(&self) -> usize {
        self.train_predictions.len()
    }

    fn check(&self, x: &Matrix<T>) -> Result<()> {
        if x.cols() != self.d {
            return Err(Error::Argument(format!(
                "inputs have {} columns, model expects {}",
                x.cols(),
                self.d
            )));
        }
        Ok(())
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        self.check(x)?;
        let mut out = vec![T::zero(); x.rows()];
        for round in &self.rounds {
            for (o, p) in out.iter_mut().zip(round.tree.predict(x)?) {
                *o += self.learning_rate * p;
            }
        }
        Ok(out)
    }

    /// Weight rows for every input (`m × n`), rebuilt from the stored corrections.
    pub fn weight_rows(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.check(x)?;
        let mut w = Matrix::zeros(x.rows(), self.n_train());
        for (p, round) in self.rounds.iter().enumerate() {
            let correction = round.correction.as_ref().ok_or_else(|| Error::Precondition {
                model: format!("boosted model (seed {})", self.seed),
                reason: "fitted without stored corrections; use fit() to rebuild weights".into(),
            })?;
            let leaves = round.tree.leaf_indices(x)?;
            let c = (p > 0).then_some(correction);
            apply_round(&mut w, &leaves, &round.tree, c, self.learning_rate);
        }
        Ok(w)
    }

    pub fn weights_boost(&self, x0: &[T]) -> Result<SmootherWeights<T>> {
        let w = self.weight_rows(&Matrix::from_vec(1, x0.len(), x0.to_vec()))?;
        Ok(SmootherWeights::new(w.into_vec()))
    }
}

impl<T: Real> Smoother<T> for BoostedModel<T> {
    fn n_train(&self) -> usize {
        self.train_predictions.len()
    }

    fn predict(&self, inputs: &Matrix<T>) -> Result<Vec<T>> {
        BoostedModel::predict(self, inputs)
    }

    fn weight_matrix(&self, inputs: &Matrix<T>) -> Result<Matrix<T>> {
        self.weight_rows(inputs)
    }

    fn label(&self) -> String {
        format!("boost(rounds={})", self.rounds.len())
    }
}

/// Average of boosted models with seeds `base_seed + 1, …, base_seed + P^ens`.
#[derive(Debug, Clone)]
pub struct BoostedEnsemble<T> {
    members: Vec<BoostedModel<T>>,
}

impl<T: Real> BoostedEnsemble<T> {
    pub fn fit(
        x: &Matrix<T>,
        y: &[T],
        cfg: &BoostConfig,
        p_ens: usize,
        base_seed: u64,
    ) -> Result<Self> {
        if p_ens == 0 {
            return Err(Error::Argument("p_ens must be at least 1".into()));
        }
        let index = FeatureIndex::new(x)?;
        let members = (1..=p_ens as u64)
            .into_par_iter()
            .map(|m| {
                let c = BoostConfig {
                    seed: base_seed.wrapping_add(m),
                    ..*cfg
                };
                BoostedModel::fit_indexed(&index, y, &c)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members })
    }

    pub fn members(&self) -> &[BoostedModel<T>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl<T: Real> Smoother<T> for BoostedEnsemble<T> {
    fn n_train(&self) -> usize {
        self.members[0].n_train()
    }

    fn predict(&self, inputs: &Matrix<T>) -> Result<Vec<T>> {
        let mut acc = vec![T::zero(); inputs.rows()];
        for m in &self.members {
            for (a, p) in acc.iter_mut().zip(m.predict(inputs)?) {
                *a += p;
            }
        }
        let k = T::from_usize_lossy(self.members.len());
        Ok(acc.into_iter().map(|a| a / k).collect())
    }

    fn weight_matrix(&self, inputs: &Matrix<T>) -> Result<Matrix<T>> {
        let mut acc = Matrix::zeros(inputs.rows(), self.n_train());
        for m in &self.members {
            let w = m.weight_rows(inputs)?;
            for (a, &v) in acc.as_mut_slice().iter_mut().zip(w.as_slice()) {
                *a += v;
            }
        }
        acc.scale_in_place(T::one() / T::from_usize_lossy(self.members.len()));
        Ok(acc)
    }

    fn label(&self) -> String {
        format!("boost-ensemble(members={})", self.members.len())
    }
}
