use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::boosting_smoothers::{BoostConfig, BoostedModel};
use crate::dataset::{synth_generate, Dataset, SyntheticSpec};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, Matrix, ThinSvd};
use crate::linear_smoothers::{LinearFit, PcrScaling, Scaler};
use crate::rff::RffMap;
use crate::scalar::Real;
use crate::smoother::{KnnSmoother, Smoother};
use crate::tree_smoothers::FeatureIndex;

use super::evaluate::{member_seed, SharedParams, TaskData};
use super::schedule::{Family, Mechanism, SchedulePoint, SweepSchedule};
use super::stats::{self, Stat};
use super::{run_many, run_sweep, SweepResult};

/// How the second axis continues after a mechanism switch.
#[derive(Debug, Clone, PartialEq)]
pub enum Continuation {
    /// The same second-axis values after every switch.
    Values(Vec<usize>),
    /// RFF only: `P_ex` chosen so that `P_phi = P_PC + P_ex` hits these
    /// totals; totals not above the switch value are skipped.
    RffTotals(Vec<usize>),
}

impl Continuation {
    pub fn values_after(&self, switch: usize) -> Vec<usize> {
        match self {
            Continuation::Values(v) => v.clone(),
            Continuation::RffTotals(t) => t.iter().filter(|&&t| t > switch).map(|&t| t - switch).collect(),
        }
    }
}

/// One composite schedule per switch value, evaluated together.
pub fn peak_move<T: Real>(
    family: Family,
    axis1_grid: &[usize],
    switch_values: &[usize],
    continuation: &Continuation,
    train: &Dataset<T>,
    test: &Dataset<T>,
    shared: &SharedParams,
) -> Result<Vec<SweepResult>> {
    let schedules = switch_values
        .iter()
        .map(|&v| SweepSchedule::switch_at(family, axis1_grid, v, &continuation.values_after(v)))
        .collect::<Result<Vec<_>>>()?;
    run_many(&schedules, train, test, shared)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipleDescent {
    pub result: SweepResult,
    /// Interior local maxima of the median test error, as point indices.
    pub peaks: Vec<usize>,
}

pub fn multiple_descent<T: Real>(
    schedule: &SweepSchedule,
    train: &Dataset<T>,
    test: &Dataset<T>,
    shared: &SharedParams,
) -> Result<MultipleDescent> {
    let result = run_sweep(schedule, train, test, shared)?;
    let peaks = stats::local_maxima(&result.median_test_mse());
    Ok(MultipleDescent { result, peaks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// A point of the composite schedule itself.
    Composite,
    /// A first-axis reduction at a fixed second-axis value.
    Contour,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Composite => "composite",
            Branch::Contour => "contour",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourRow {
    pub branch: Branch,
    pub mechanism: Mechanism,
    pub axis1: usize,
    pub axis2: usize,
    pub p_train: Stat,
    pub p_test: Stat,
    pub test_mse: Stat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackToU {
    pub family: Family,
    pub switch: usize,
    pub rows: Vec<ContourRow>,
    pub composite: SweepResult,
}

impl BackToU {
    /// The composite point where the mechanisms switch.
    pub fn switch_row(&self) -> &ContourRow {
        self.rows
            .iter()
            .rfind(|r| r.branch == Branch::Composite && r.mechanism == Mechanism::First)
            .expect("composite schedule has a first-axis point")
    }

    /// Composite rows grown along the second axis, in schedule order.
    pub fn axis2_branch(&self) -> Vec<&ContourRow> {
        self.rows
            .iter()
            .filter(|r| r.branch == Branch::Composite && r.mechanism == Mechanism::Second)
            .collect()
    }
}

/// Runs the composite schedule switching at `switch`, plus, for every
/// second-axis value after the switch, the first-axis `reductions` at that
/// fixed second-axis value.
#[allow(clippy::too_many_arguments)]
pub fn back_to_u<T: Real>(
    family: Family,
    axis1_grid: &[usize],
    switch: usize,
    continuation: &Continuation,
    reductions: &[usize],
    train: &Dataset<T>,
    test: &Dataset<T>,
    shared: &SharedParams,
) -> Result<BackToU> {
    let after = continuation.values_after(switch);
    let composite = SweepSchedule::switch_at(family, axis1_grid, switch, &after)?;
    let contour_points: Vec<SchedulePoint> = after
        .iter()
        .flat_map(|&b| {
            reductions
                .iter()
                .filter(move |&&a| a < switch)
                .map(move |&a| SchedulePoint::new(a, b))
        })
        .collect();
    let mut schedules = vec![composite.clone()];
    if !contour_points.is_empty() {
        schedules.push(SweepSchedule::new(family, contour_points));
    }
    let results = run_many(&schedules, train, test, shared)?;
    let mechanisms = composite.mechanisms();
    let mut rows = Vec::new();
    for (k, res) in results.iter().enumerate() {
        for s in res.summary() {
            rows.push(ContourRow {
                branch: if k == 0 { Branch::Composite } else { Branch::Contour },
                mechanism: if k == 0 { mechanisms[s.point_index] } else { Mechanism::First },
                axis1: s.axis1_value,
                axis2: s.axis2_value,
                p_train: s.p_train,
                p_test: s.p_test,
                test_mse: s.test_mse,
            });
        }
    }
    Ok(BackToU {
        family,
        switch,
        rows,
        composite: results.into_iter().next().expect("composite result"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondRow {
    pub p_phi: usize,
    pub k: usize,
    pub sigma_k: f64,
    /// `σ₁ / σ_k`; infinite when `k` exceeds the retained rank.
    pub kappa: f64,
}

/// Singular values and condition numbers of the scaled RFF design.
pub fn cond_study<T: Real>(
    map: &RffMap<T>,
    x: &Matrix<T>,
    p_phi_values: &[usize],
    k_values: &[usize],
    scaling: PcrScaling,
) -> Result<Vec<CondRow>> {
    let per_phi = p_phi_values
        .par_iter()
        .map(|&p_phi| {
            let phi = map.transform(x, p_phi)?;
            let z = Scaler::fit(&phi, scaling).apply(&phi)?;
            let svd = ThinSvd::new(&z)?;
            Ok(k_values
                .iter()
                .map(|&k| CondRow {
                    p_phi,
                    k,
                    sigma_k: if k >= 1 && k <= svd.singular_values.len() {
                        svd.singular_values[k - 1].to_f64_lossy()
                    } else {
                        0.0
                    },
                    kappa: svd.condition_number(k).to_f64_lossy(),
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_phi.concat())
}

/// A fitted model together with the inputs it was trained on.
pub struct FixedDesignModel<'a, T> {
    pub name: String,
    pub model: &'a dyn Smoother<T>,
    pub train_inputs: &'a Matrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedDesignRow {
    pub name: String,
    pub train_mse: f64,
    /// Mean squared error of the training predictions against the resampled targets.
    pub fixed_design_loss: f64,
    /// `Σ (y_train_i − y_test_i)² / n`.
    pub reference_loss: f64,
    /// `max |Ŝ − I|` over the training hat matrix.
    pub identity_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedDesignReport {
    pub rows: Vec<FixedDesignRow>,
}

impl FixedDesignReport {
    /// Largest gap between any model's loss and the reference loss.
    pub fn max_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.fixed_design_loss - r.reference_loss).abs())
            .fold(0.0, f64::max)
    }

    /// Largest pairwise gap between model losses.
    pub fn max_pairwise_gap(&self) -> f64 {
        let l: Vec<f64> = self.rows.iter().map(|r| r.fixed_design_loss).collect();
        let hi = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = l.iter().cloned().fold(f64::INFINITY, f64::min);
        if l.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

/// In-sample prediction error of interpolating models against resampled
/// targets. Every model must reach training MSE below `eps`.
pub fn fixed_design_check<T: Real>(
    models: &[FixedDesignModel<'_, T>],
    y_train: &[T],
    y_test: &[T],
    eps: f64,
) -> Result<FixedDesignReport> {
    if y_train.len() != y_test.len() {
        return Err(Error::Consistency(format!(
            "{} training targets but {} resampled targets",
            y_train.len(),
            y_test.len()
        )));
    }
    let n = y_train.len() as f64;
    let reference = y_train
        .iter()
        .zip(y_test)
        .map(|(&a, &b)| (a - b).to_f64_lossy().powi(2))
        .sum::<f64>()
        / n;
    let mut rows = Vec::with_capacity(models.len());
    for m in models {
        if m.model.n_train() != y_train.len() {
            return Err(Error::Consistency(format!(
                "model '{}' was trained on {} targets, got {}",
                m.name,
                m.model.n_train(),
                y_train.len()
            )));
        }
        let pred = m.model.predict(m.train_inputs)?;
        let mse = |y: &[T]| {
            pred.iter()
                .zip(y)
                .map(|(&a, &b)| (a - b).to_f64_lossy().powi(2))
                .sum::<f64>()
                / n
        };
        let train_mse = mse(y_train);
        if !(train_mse < eps) {
            return Err(Error::Precondition {
                model: m.name.clone(),
                reason: format!("training MSE {train_mse:e} is not below {eps:e}"),
            });
        }
        let hat = m.model.weight_matrix(m.train_inputs)?;
        let identity_deviation = hat
            .sub(&Matrix::identity(hat.rows()))
            .max_abs()
            .to_f64_lossy();
        rows.push(FixedDesignRow {
            name: m.name.clone(),
            train_mse,
            fixed_design_loss: mse(y_test),
            reference_loss: reference,
            identity_deviation,
        });
    }
    Ok(FixedDesignReport { rows })
}

/// Smoothers available to the bias/variance study.
#[derive(Debug, Clone, PartialEq)]
pub enum BiasVarianceModel {
    SampleMean,
    /// Least squares on an intercept and the first `p − 1` input coordinates.
    Ols { p: usize },
    Knn { k: usize },
    MinNormRff { p_phi: usize, scale: f64, seed: u64 },
    /// Adaptive; rejected because its weights depend on the targets.
    Tree { max_leaves: usize },
}

/// Where bias and variance are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPoints {
    Train,
    /// `m` fresh inputs from the generating distribution.
    Fresh { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasVariancePoint {
    pub truth: f64,
    pub analytic_bias: f64,
    pub analytic_var: f64,
    /// `σ² + bias² + var`, the expected error against a fresh noisy target.
    pub analytic_mse: f64,
    pub mc_bias: f64,
    pub mc_bias_se: f64,
    pub mc_var: f64,
    pub mc_var_se: f64,
    pub mc_mse: f64,
    pub mc_mse_se: f64,
}

impl BiasVariancePoint {
    /// Largest `|analytic − Monte Carlo| / SE` over bias, variance and MSE.
    pub fn max_z(&self) -> f64 {
        let z = |a: f64, b: f64, se: f64| {
            if se > 0.0 {
                (a - b).abs() / se
            } else if (a - b).abs() <= 1e-12 * (1.0 + a.abs()) {
                0.0
            } else {
                f64::INFINITY
            }
        };
        z(self.analytic_bias, self.mc_bias, self.mc_bias_se)
            .max(z(self.analytic_var, self.mc_var, self.mc_var_se))
            .max(z(self.analytic_mse, self.mc_mse, self.mc_mse_se))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasVarianceReport {
    pub noise_std: f64,
    pub n_resamples: usize,
    pub points: Vec<BiasVariancePoint>,
}

impl BiasVarianceReport {
    pub fn max_z(&self) -> f64 {
        self.points.iter().map(|p| p.max_z()).fold(0.0, f64::max)
    }
}

struct LinearDesign {
    train: Matrix<f64>,
    eval: Matrix<f64>,
}

fn bv_design(model: &BiasVarianceModel, x: &Matrix<f64>, x0: &Matrix<f64>) -> Result<LinearDesign> {
    match *model {
        BiasVarianceModel::SampleMean => Ok(LinearDesign {
            train: Matrix::from_fn(x.rows(), 1, |_, _| 1.0),
            eval: Matrix::from_fn(x0.rows(), 1, |_, _| 1.0),
        }),
        BiasVarianceModel::Ols { p } => {
            if p == 0 || p - 1 > x.cols() {
                return Err(Error::Argument(format!(
                    "OLS with p = {p} needs 1 <= p <= d + 1 = {}",
                    x.cols() + 1
                )));
            }
            let cols: Vec<usize> = (0..p - 1).collect();
            Ok(LinearDesign {
                train: x.select_columns(&cols).with_intercept(),
                eval: x0.select_columns(&cols).with_intercept(),
            })
        }
        BiasVarianceModel::MinNormRff { p_phi, scale, seed } => {
            let map = RffMap::sample(seed, p_phi, x.cols(), scale)?;
            Ok(LinearDesign {
                train: map.transform(x, p_phi)?,
                eval: map.transform(x0, p_phi)?,
            })
        }
        BiasVarianceModel::Knn { .. } => Ok(LinearDesign {
            train: x.clone(),
            eval: x0.clone(),
        }),
        BiasVarianceModel::Tree { .. } => Err(Error::Precondition {
            model: "tree".into(),
            reason: "adaptive smoother: its weights depend on the targets, so the analytic \
                     bias/variance expressions do not hold"
                .into(),
        }),
    }
}

fn bv_fit(model: &BiasVarianceModel, design: &Matrix<f64>, y: &[f64]) -> Result<Box<dyn Smoother<f64>>> {
    Ok(match *model {
        BiasVarianceModel::SampleMean | BiasVarianceModel::Ols { .. } => {
            Box::new(LinearFit::fit_ols(design, y)?)
        }
        BiasVarianceModel::MinNormRff { .. } => Box::new(LinearFit::fit_minnorm(design, y)?),
        BiasVarianceModel::Knn { k } => Box::new(KnnSmoother::fit(design, y, k)?),
        BiasVarianceModel::Tree { .. } => unreachable!("rejected by bv_design"),
    })
}

/// Analytic bias, variance and expected error of a linear smoother on
/// synthetic data, against Monte Carlo estimates over `n_resamples`
/// redraws of the training noise.
pub fn bias_variance(
    spec: &SyntheticSpec,
    model: &BiasVarianceModel,
    n_resamples: usize,
    eval: EvalPoints,
    seed: u64,
) -> Result<BiasVarianceReport> {
    if n_resamples < 2 {
        return Err(Error::Argument("bias/variance needs at least two resamples".into()));
    }
    let ds: Dataset<f64> = synth_generate(spec)?;
    let x = ds.features();
    let f_train = ds.truth().expect("synthetic data carries its truth").to_vec();
    let (x0, f0) = match eval {
        EvalPoints::Train => (x.clone(), f_train.clone()),
        EvalPoints::Fresh { m } => {
            let fresh: Dataset<f64> = synth_generate(&SyntheticSpec {
                n: m,
                ..spec.with_seed(spec.seed.wrapping_add(0x9E37_79B9))
            })?;
            (fresh.features().clone(), fresh.truth().expect("truth").to_vec())
        }
    };
    let design = bv_design(model, x, &x0)?;
    let sigma = spec.noise_std;
    let reference = bv_fit(model, &design.train, &f_train)?;
    let w = reference.weight_matrix(&design.eval)?;
    let m = x0.rows();
    let mut sum = vec![0.0; m];
    let mut sum_sq = vec![0.0; m];
    let mut err = vec![0.0; m];
    let mut err_sq = vec![0.0; m];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; f_train.len()];
    for _ in 0..n_resamples {
        for (yi, &fi) in y.iter_mut().zip(&f_train) {
            let e: f64 = StandardNormal.sample(&mut rng);
            *yi = fi + sigma * e;
        }
        let pred = bv_fit(model, &design.train, &y)?.predict(&design.eval)?;
        for j in 0..m {
            let e: f64 = StandardNormal.sample(&mut rng);
            let y0 = f0[j] + sigma * e;
            sum[j] += pred[j];
            sum_sq[j] += pred[j] * pred[j];
            let d = (pred[j] - y0).powi(2);
            err[j] += d;
            err_sq[j] += d * d;
        }
    }
    let r = n_resamples as f64;
    let points = (0..m)
        .map(|j| {
            let row = w.row(j);
            let bias = f0[j] - row.iter().zip(&f_train).map(|(a, b)| a * b).sum::<f64>();
            let var = sigma * sigma * norm_sq(row);
            let mean = sum[j] / r;
            let s2 = ((sum_sq[j] - r * mean * mean) / (r - 1.0)).max(0.0);
            let mse = err[j] / r;
            let mse_var = ((err_sq[j] - r * mse * mse) / (r - 1.0)).max(0.0);
            BiasVariancePoint {
                truth: f0[j],
                analytic_bias: bias,
                analytic_var: var,
                analytic_mse: sigma * sigma + bias * bias + var,
                mc_bias: f0[j] - mean,
                mc_bias_se: (s2 / r).sqrt(),
                mc_var: s2,
                mc_var_se: s2 * (2.0 / (r - 1.0)).sqrt(),
                mc_mse: mse,
                mc_mse_se: (mse_var / r).sqrt(),
            }
        })
        .collect();
    Ok(BiasVarianceReport {
        noise_std: sigma,
        n_resamples,
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRow {
    pub leaf_budget: usize,
    pub learning_rate: f64,
    pub rounds: usize,
    pub interpolates: bool,
    pub train_mse: f64,
    pub test_mse: f64,
    pub p_train: f64,
    pub p_test: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTable {
    pub rows: Vec<SelectionRow>,
    /// Spearman correlation of `p_test` and test error over interpolating rows.
    pub spearman: Option<f64>,
    /// Interpolating row with the lowest `p_test`.
    pub selected: Option<usize>,
    /// Interpolating row with the lowest test error.
    pub best: Option<usize>,
}

/// Boosts every `(leaf budget, learning rate)` pair on the binary task of
/// `shared.eval_class` until training MSE drops below `eps` or `max_rounds`
/// is reached, recording test error and effective parameters at the end.
pub fn model_selection_study<T: Real>(
    train: &Dataset<T>,
    test: &Dataset<T>,
    leaf_grid: &[usize],
    lr_grid: &[f64],
    eps: f64,
    max_rounds: usize,
    shared: &SharedParams,
) -> Result<SelectionTable> {
    let seed = *shared
        .seeds
        .first()
        .ok_or_else(|| Error::Argument("at least one seed is required".into()))?;
    let data = TaskData::new(train, test, shared.eval_class)?;
    let n = data.n_train();
    let y = data.y_train.column(data.eval_col);
    let y_test = data.y_test.column(data.eval_col);
    let index = FeatureIndex::new(data.x_train)?;
    let configs: Vec<(usize, f64)> = leaf_grid
        .iter()
        .flat_map(|&l| lr_grid.iter().map(move |&lr| (l.min(n), lr)))
        .collect();
    let rows = configs
        .par_iter()
        .map(|&(leaf_budget, learning_rate)| {
            let cfg = BoostConfig {
                n_rounds: max_rounds,
                learning_rate,
                leaf_budget,
                seed: member_seed(seed, 1),
                stop_tol: Some(eps),
                max_features: shared.max_features,
            };
            let mut last = None;
            let model = BoostedModel::fit_observed(&index, &y, &cfg, &[data.x_test], true, &mut |v| {
                if v.train_mse.to_f64_lossy() < eps || v.round == max_rounds {
                    let wt = v.train_weights.expect("weights tracked");
                    let we = &v.eval_weights[0];
                    let p = |w: &Matrix<T>| {
                        n as f64 / w.rows() as f64
                            * w.row_iter().map(|r| norm_sq(r).to_f64_lossy()).sum::<f64>()
                    };
                    let test_mse = v.eval_predictions[0]
                        .iter()
                        .zip(&y_test)
                        .map(|(&a, &b)| (a - b).to_f64_lossy().powi(2))
                        .sum::<f64>()
                        / y_test.len() as f64;
                    last = Some((p(wt), p(we), test_mse));
                }
            })?;
            let train_mse = model.train_mse_history().last().expect("one round").to_f64_lossy();
            let (p_train, p_test, test_mse) = last.expect("final round observed");
            Ok(SelectionRow {
                leaf_budget,
                learning_rate,
                rounds: model.n_rounds(),
                interpolates: train_mse < eps,
                train_mse,
                test_mse,
                p_train,
                p_test,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let interp: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].interpolates).collect();
    let pick = |key: &dyn Fn(&SelectionRow) -> f64| {
        interp
            .iter()
            .copied()
            .min_by(|&a, &b| key(&rows[a]).total_cmp(&key(&rows[b])).then(a.cmp(&b)))
    };
    let selected = pick(&|r| r.p_test);
    let best = pick(&|r| r.test_mse);
    let spearman = stats::spearman(
        &interp.iter().map(|&i| rows[i].p_test).collect::<Vec<_>>(),
        &interp.iter().map(|&i| rows[i].test_mse).collect::<Vec<_>>(),
    );
    Ok(SelectionTable {
        rows,
        spearman,
        selected,
        best,
    })
}
