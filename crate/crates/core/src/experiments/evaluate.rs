//! Fitting and scoring of schedule points, one evaluator per family.
//!
//! Each evaluator receives every point needed for one seed and shares work
//! between them: RFF points with the same `P_phi` reuse one principal
//! component basis, tree points reuse truncations of one full tree per
//! ensemble member, and boosting points are read off one boosting run per
//! member at the required rounds. Ensembles are accumulated member by member.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;

use crate::boosting_smoothers::{BoostConfig, BoostedModel, DEFAULT_LEAF_BUDGET, DEFAULT_LEARNING_RATE};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, Matrix};
use crate::linear_smoothers::{PcrBasis, PcrScaling};
use crate::rff::{RffMap, DEFAULT_SCALE};
use crate::scalar::Real;
use crate::tree_smoothers::{FeatureIndex, RegressionTree, TreeOptions};

use super::schedule::{Family, SchedulePoint};

/// Hyperparameters held fixed along a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedParams {
    pub rff_scale: f64,
    pub pcr_scaling: PcrScaling,
    pub learning_rate: f64,
    /// Leaf budget of the boosting base trees.
    pub leaf_budget: usize,
    /// Features examined per tree node; `None` means `⌊√d⌋`.
    pub max_features: Option<usize>,
    /// Class whose one-vs-all model supplies `p_train` and `p_test`.
    pub eval_class: usize,
    pub seeds: Vec<u64>,
}

impl Default for SharedParams {
    fn default() -> Self {
        Self {
            rff_scale: DEFAULT_SCALE,
            pcr_scaling: PcrScaling::Standardize,
            learning_rate: DEFAULT_LEARNING_RATE,
            leaf_budget: DEFAULT_LEAF_BUDGET,
            max_features: None,
            eval_class: 0,
            seeds: vec![0],
        }
    }
}

/// Seed of ensemble member `member` (1-based) under experiment seed `seed`.
pub fn member_seed(seed: u64, member: usize) -> u64 {
    (seed << 32).wrapping_add(member as u64)
}

/// Scores of one schedule point for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEval {
    pub train_mse: f64,
    pub test_mse: f64,
    pub test_zero_one: Option<f64>,
    pub p_train: f64,
    pub p_test: f64,
    pub wall_time: f64,
}

/// Inputs and one target column per task: one-hot classes for labelled
/// data, the raw targets otherwise.
pub(crate) struct TaskData<'a, T> {
    pub x_train: &'a Matrix<T>,
    pub x_test: &'a Matrix<T>,
    pub y_train: Matrix<T>,
    pub y_test: Matrix<T>,
    pub test_labels: Option<Vec<usize>>,
    pub eval_col: usize,
}

impl<'a, T: Real> TaskData<'a, T> {
    pub fn new(train: &'a Dataset<T>, test: &'a Dataset<T>, eval_class: usize) -> Result<Self> {
        if train.dim() != test.dim() {
            return Err(Error::Consistency(format!(
                "train has {} features, test has {}",
                train.dim(),
                test.dim()
            )));
        }
        if let (Some(a), Some(b)) = (train.class_labels(), test.class_labels()) {
            let classes = train.num_classes().unwrap_or(0).max(test.num_classes().unwrap_or(0));
            if classes < 2 {
                return Err(Error::Argument(format!(
                    "one-vs-all needs at least two classes, found {classes}"
                )));
            }
            if eval_class >= classes {
                return Err(Error::Argument(format!(
                    "eval class {eval_class} outside 0..{classes}"
                )));
            }
            let one_hot = |labels: &[usize]| {
                Matrix::from_fn(labels.len(), classes, |i, c| {
                    if labels[i] == c {
                        T::one()
                    } else {
                        T::zero()
                    }
                })
            };
            return Ok(Self {
                x_train: train.features(),
                x_test: test.features(),
                y_train: one_hot(a),
                y_test: one_hot(b),
                test_labels: Some(b.to_vec()),
                eval_col: eval_class,
            });
        }
        Ok(Self {
            x_train: train.features(),
            x_test: test.features(),
            y_train: Matrix::from_vec(train.len(), 1, train.targets().to_vec()),
            y_test: Matrix::from_vec(test.len(), 1, test.targets().to_vec()),
            test_labels: None,
            eval_col: 0,
        })
    }

    pub fn n_train(&self) -> usize {
        self.x_train.rows()
    }

    pub fn tasks(&self) -> usize {
        self.y_train.cols()
    }

    fn target(&self, c: usize) -> Vec<T> {
        self.y_train.column(c)
    }

    fn score(&self, f_train: &Matrix<T>, f_test: &Matrix<T>, p_train: f64, p_test: f64, wall: f64) -> PointEval {
        PointEval {
            train_mse: squared_error(&self.y_train, f_train),
            test_mse: squared_error(&self.y_test, f_test),
            test_zero_one: self.test_labels.as_ref().map(|l| zero_one(f_test, l)),
            p_train,
            p_test,
            wall_time: wall,
        }
    }
}

/// Squared error summed over task columns, averaged over rows.
fn squared_error<T: Real>(y: &Matrix<T>, f: &Matrix<T>) -> f64 {
    let total: f64 = y
        .as_slice()
        .iter()
        .zip(f.as_slice())
        .map(|(&a, &b)| (a - b).to_f64_lossy().powi(2))
        .sum();
    total / y.rows() as f64
}

/// Fraction of rows whose largest score (lowest index on ties) is not the label.
fn zero_one<T: Real>(f: &Matrix<T>, labels: &[usize]) -> f64 {
    let wrong = f
        .row_iter()
        .zip(labels)
        .filter(|(row, &l)| {
            let mut best = 0;
            for (j, v) in row.iter().enumerate() {
                if *v > row[best] {
                    best = j;
                }
            }
            best != l
        })
        .count();
    wrong as f64 / labels.len() as f64
}

/// `(n / m) Σ ‖row‖²` over the rows of `w` after scaling them by `scale`.
fn p_of_rows<T: Real>(w: &Matrix<T>, scale: f64) -> f64 {
    let total: f64 = w.row_iter().map(|r| norm_sq(r).to_f64_lossy()).sum();
    w.cols() as f64 / w.rows() as f64 * total * scale * scale
}

fn p_of_norms<T: Real>(norms: &[T], n: usize) -> f64 {
    n as f64 / norms.len() as f64 * norms.iter().map(|v| v.to_f64_lossy()).sum::<f64>()
}

pub(crate) fn evaluate_points<T: Real>(
    family: Family,
    data: &TaskData<'_, T>,
    points: &[SchedulePoint],
    shared: &SharedParams,
    seed: u64,
) -> Result<Vec<PointEval>> {
    match family {
        Family::RffLinear => eval_rff(data, points, shared, seed),
        Family::Tree => eval_tree(data, points, shared, seed),
        Family::Boosting => eval_boost(data, points, shared, seed),
    }
}

fn eval_rff<T: Real>(
    data: &TaskData<'_, T>,
    points: &[SchedulePoint],
    shared: &SharedParams,
    seed: u64,
) -> Result<Vec<PointEval>> {
    let n = data.n_train();
    let p_max = points.iter().map(|p| p.axis1 + p.axis2).max().unwrap_or(1);
    let map = RffMap::<T>::sample(seed, p_max, data.x_train.cols(), shared.rff_scale)?;
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        groups.entry(p.axis1 + p.axis2).or_default().push(i);
    }
    let nf = T::from_usize_lossy(n);
    let means: Vec<T> = (0..data.tasks())
        .map(|c| data.y_train.column(c).into_iter().sum::<T>() / nf)
        .collect();
    let mut out: Vec<Option<PointEval>> = vec![None; points.len()];
    for (p_phi, idxs) in groups {
        let start = Instant::now();
        let phi_train = map.transform(data.x_train, p_phi)?;
        let phi_test = map.transform(data.x_test, p_phi)?;
        let basis = PcrBasis::new(&phi_train, shared.pcr_scaling)?;
        let s_test = basis.scores(&phi_test)?;
        let s_train = basis.train_scores();
        let projected = basis.project_targets(&data.y_train);
        let setup = start.elapsed().as_secs_f64() / idxs.len() as f64;
        for i in idxs {
            let t = Instant::now();
            let k = points[i].axis1;
            if k > basis.max_components() {
                return Err(Error::Numerical(format!(
                    "P_PC = {k} exceeds the numerical rank {} of the standardized design at P_phi = {p_phi}",
                    basis.max_components()
                )));
            }
            let f_train = basis.predict(s_train, k, &projected, &means)?;
            let f_test = basis.predict(&s_test, k, &projected, &means)?;
            let p_train = p_of_norms(&basis.weight_norms_sq(s_train, k)?, n);
            let p_test = p_of_norms(&basis.weight_norms_sq(&s_test, k)?, n);
            let wall = setup + t.elapsed().as_secs_f64();
            out[i] = Some(data.score(&f_train, &f_test, p_train, p_test, wall));
        }
    }
    Ok(out.into_iter().map(|e| e.expect("every point evaluated")).collect())
}

/// Per-task predictions (and weight norms for the evaluated task) at every
/// `(axis1, members)` pair requested.
struct TaskOutput<T> {
    preds: BTreeMap<(usize, usize), (Vec<T>, Vec<T>)>,
    p: BTreeMap<(usize, usize), (f64, f64)>,
}

/// Running sums over ensemble members for one axis-1 value.
struct Accumulator<T> {
    train: Vec<T>,
    test: Vec<T>,
    w_train: Option<Matrix<T>>,
    w_test: Option<Matrix<T>>,
}

impl<T: Real> Accumulator<T> {
    fn new(n: usize, m: usize, track: bool) -> Self {
        Self {
            train: vec![T::zero(); n],
            test: vec![T::zero(); m],
            w_train: track.then(|| Matrix::zeros(n, n)),
            w_test: track.then(|| Matrix::zeros(m, n)),
        }
    }

    fn snapshot(&self, key: (usize, usize), members: usize, out: &mut TaskOutput<T>) {
        let inv = T::one() / T::from_usize_lossy(members);
        out.preds.insert(
            key,
            (
                self.train.iter().map(|&v| v * inv).collect(),
                self.test.iter().map(|&v| v * inv).collect(),
            ),
        );
        if let (Some(wt), Some(we)) = (&self.w_train, &self.w_test) {
            let s = 1.0 / members as f64;
            out.p.insert(key, (p_of_rows(wt, s), p_of_rows(we, s)));
        }
    }
}

fn add_into<T: Real>(dst: &mut [T], src: &[T]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// `axis1 value → requested member counts`.
type Plan = BTreeMap<usize, BTreeSet<usize>>;

fn assemble<T: Real>(
    data: &TaskData<'_, T>,
    keys: &[(usize, usize)],
    outputs: Vec<TaskOutput<T>>,
    elapsed: f64,
) -> Vec<PointEval> {
    let n = data.n_train();
    let m = data.x_test.rows();
    let tasks = outputs.len();
    keys.iter()
        .map(|key| {
            let mut f_train = Matrix::zeros(n, tasks);
            let mut f_test = Matrix::zeros(m, tasks);
            for (c, o) in outputs.iter().enumerate() {
                let (tr, te) = &o.preds[key];
                for i in 0..n {
                    f_train[(i, c)] = tr[i];
                }
                for i in 0..m {
                    f_test[(i, c)] = te[i];
                }
            }
            let (p_train, p_test) = outputs[data.eval_col].p[key];
            data.score(&f_train, &f_test, p_train, p_test, elapsed / keys.len() as f64)
        })
        .collect()
}

fn eval_tree<T: Real>(
    data: &TaskData<'_, T>,
    points: &[SchedulePoint],
    shared: &SharedParams,
    seed: u64,
) -> Result<Vec<PointEval>> {
    let start = Instant::now();
    let n = data.n_train();
    let keys: Vec<(usize, usize)> = points.iter().map(|p| (p.axis1.min(n), p.axis2)).collect();
    let mut plan: Plan = BTreeMap::new();
    for &(l, e) in &keys {
        plan.entry(l).or_default().insert(e);
    }
    let index = FeatureIndex::new(data.x_train)?;
    let outputs = (0..data.tasks())
        .into_par_iter()
        .map(|c| tree_task(data, &index, &plan, c, shared, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(data, &keys, outputs, start.elapsed().as_secs_f64()))
}

fn tree_task<T: Real>(
    data: &TaskData<'_, T>,
    index: &FeatureIndex<T>,
    plan: &Plan,
    c: usize,
    shared: &SharedParams,
    seed: u64,
) -> Result<TaskOutput<T>> {
    let y = data.target(c);
    let track = c == data.eval_col;
    let n = data.n_train();
    let m = data.x_test.rows();
    let mut accs: BTreeMap<usize, Accumulator<T>> = plan
        .keys()
        .map(|&l| (l, Accumulator::new(n, m, track)))
        .collect();
    let mut out = TaskOutput {
        preds: BTreeMap::new(),
        p: BTreeMap::new(),
    };
    let e_max = plan.values().filter_map(|s| s.last()).copied().max().unwrap_or(0);
    for member in 1..=e_max {
        let active: Vec<usize> = plan
            .iter()
            .filter(|(_, es)| es.last().is_some_and(|&e| e >= member))
            .map(|(&l, _)| l)
            .collect();
        let budget = *active.iter().max().expect("member needed by some point");
        let full = RegressionTree::fit_indexed(
            index,
            &y,
            &TreeOptions {
                max_leaves: budget,
                max_features: shared.max_features,
                seed: member_seed(seed, member),
            },
        )?;
        for &l in &active {
            let truncated;
            let tree = if l < full.n_leaves() {
                truncated = full.truncate(l);
                &truncated
            } else {
                &full
            };
            let acc = accs.get_mut(&l).expect("accumulator per leaf budget");
            let train_leaves = tree.train_leaves();
            let test_leaves = tree.leaf_indices(data.x_test)?;
            for (v, &leaf) in acc.train.iter_mut().zip(train_leaves) {
                *v += tree.leaf_value(leaf as usize);
            }
            for (v, &leaf) in acc.test.iter_mut().zip(&test_leaves) {
                *v += tree.leaf_value(leaf);
            }
            if let (Some(wt), Some(we)) = (acc.w_train.as_mut(), acc.w_test.as_mut()) {
                for (i, &leaf) in train_leaves.iter().enumerate() {
                    tree.add_leaf_weights(leaf as usize, T::one(), wt.row_mut(i));
                }
                for (i, &leaf) in test_leaves.iter().enumerate() {
                    tree.add_leaf_weights(leaf, T::one(), we.row_mut(i));
                }
            }
            if plan[&l].contains(&member) {
                acc.snapshot((l, member), member, &mut out);
            }
        }
    }
    Ok(out)
}

fn eval_boost<T: Real>(
    data: &TaskData<'_, T>,
    points: &[SchedulePoint],
    shared: &SharedParams,
    seed: u64,
) -> Result<Vec<PointEval>> {
    let start = Instant::now();
    let keys: Vec<(usize, usize)> = points.iter().map(|p| (p.axis1, p.axis2)).collect();
    let mut plan: Plan = BTreeMap::new();
    for &(r, e) in &keys {
        plan.entry(r).or_default().insert(e);
    }
    let index = FeatureIndex::new(data.x_train)?;
    let outputs = (0..data.tasks())
        .into_par_iter()
        .map(|c| boost_task(data, &index, &plan, c, shared, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(data, &keys, outputs, start.elapsed().as_secs_f64()))
}

fn boost_task<T: Real>(
    data: &TaskData<'_, T>,
    index: &FeatureIndex<T>,
    plan: &Plan,
    c: usize,
    shared: &SharedParams,
    seed: u64,
) -> Result<TaskOutput<T>> {
    let y = data.target(c);
    let track = c == data.eval_col;
    let n = data.n_train();
    let m = data.x_test.rows();
    let mut accs: BTreeMap<usize, Accumulator<T>> = plan
        .keys()
        .map(|&r| (r, Accumulator::new(n, m, track)))
        .collect();
    let mut out = TaskOutput {
        preds: BTreeMap::new(),
        p: BTreeMap::new(),
    };
    let e_max = plan.values().filter_map(|s| s.last()).copied().max().unwrap_or(0);
    for member in 1..=e_max {
        let active: BTreeSet<usize> = plan
            .iter()
            .filter(|(_, es)| es.last().is_some_and(|&e| e >= member))
            .map(|(&r, _)| r)
            .collect();
        let cfg = BoostConfig {
            n_rounds: *active.last().expect("member needed by some point"),
            learning_rate: shared.learning_rate,
            leaf_budget: shared.leaf_budget,
            seed: member_seed(seed, member),
            stop_tol: None,
            max_features: shared.max_features,
        };
        BoostedModel::fit_observed(index, &y, &cfg, &[data.x_test], track, &mut |view| {
            if !active.contains(&view.round) {
                return;
            }
            let acc = accs.get_mut(&view.round).expect("accumulator per round count");
            add_into(&mut acc.train, view.train_predictions);
            add_into(&mut acc.test, &view.eval_predictions[0]);
            if let (Some(wt), Some(we)) = (acc.w_train.as_mut(), acc.w_test.as_mut()) {
                let src = view.train_weights.expect("weights tracked");
                add_into(wt.as_mut_slice(), src.as_slice());
                add_into(we.as_mut_slice(), view.eval_weights[0].as_slice());
            }
        })?;
        for &r in &active {
            if plan[&r].contains(&member) {
                accs[&r].snapshot((r, member), member, &mut out);
            }
        }
    }
    Ok(out)
}
