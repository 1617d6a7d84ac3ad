//! Sweep engine: schedules over the two parameter axes of each family,
//! evaluation of test error and effective parameters along them, and the
//! studies built on top (peak moving, multiple descent, contour folding,
//! conditioning, fixed design, bias/variance and model selection).
//!
//! Labelled data is handled one-vs-all with `{0, 1}` targets. Squared errors
//! are summed across the class models, the 0-1 error uses the arg-max class,
//! and `p_train`/`p_test` come from the model of [`SharedParams::eval_class`].

mod evaluate;
pub mod output;
mod schedule;
pub mod stats;
mod studies;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use evaluate::{member_seed, PointEval, SharedParams};
pub use schedule::{Axis, Family, Mechanism, SchedulePoint, SweepSchedule};
pub use stats::Stat;
pub use studies::{
    back_to_u, bias_variance, cond_study, fixed_design_check, model_selection_study,
    multiple_descent, peak_move, BackToU, BiasVarianceModel, BiasVariancePoint,
    BiasVarianceReport, Branch, CondRow, Continuation, ContourRow, EvalPoints, FixedDesignModel,
    FixedDesignReport, FixedDesignRow, MultipleDescent, SelectionRow, SelectionTable,
};

use evaluate::{evaluate_points, TaskData};

/// One evaluated schedule point under one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub point_index: usize,
    pub axis1_name: &'static str,
    pub axis1_value: usize,
    pub axis2_name: &'static str,
    pub axis2_value: usize,
    pub raw_params: u64,
    pub train_mse: f64,
    pub test_mse: f64,
    /// Absent for regression data.
    pub test_zero_one: Option<f64>,
    pub p_train: f64,
    pub p_test: f64,
    pub seed: u64,
    pub wall_time: f64,
}

/// Statistics of one schedule point across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub point_index: usize,
    pub axis1_value: usize,
    pub axis2_value: usize,
    pub raw_params: u64,
    pub train_mse: Stat,
    pub test_mse: Stat,
    pub test_zero_one: Option<Stat>,
    pub p_train: Stat,
    pub p_test: Stat,
}

/// Records in schedule order, seed by seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub family: Family,
    pub schedule: SweepSchedule,
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn seeds(&self) -> Vec<u64> {
        let mut s: Vec<u64> = Vec::new();
        for r in &self.records {
            if !s.contains(&r.seed) {
                s.push(r.seed);
            }
        }
        s
    }

    pub fn for_seed(&self, seed: u64) -> Vec<&SweepRecord> {
        self.records.iter().filter(|r| r.seed == seed).collect()
    }

    /// Per-point median and standard error over seeds.
    pub fn summary(&self) -> Vec<PointSummary> {
        let mut by_point: BTreeMap<usize, Vec<&SweepRecord>> = BTreeMap::new();
        for r in &self.records {
            by_point.entry(r.point_index).or_default().push(r);
        }
        by_point
            .into_iter()
            .map(|(i, rs)| {
                let stat = |f: &dyn Fn(&SweepRecord) -> f64| {
                    Stat::from_values(rs.iter().map(|r| f(r)).collect())
                };
                PointSummary {
                    point_index: i,
                    axis1_value: rs[0].axis1_value,
                    axis2_value: rs[0].axis2_value,
                    raw_params: rs[0].raw_params,
                    train_mse: stat(&|r| r.train_mse),
                    test_mse: stat(&|r| r.test_mse),
                    test_zero_one: rs[0]
                        .test_zero_one
                        .is_some()
                        .then(|| stat(&|r| r.test_zero_one.unwrap_or(f64::NAN))),
                    p_train: stat(&|r| r.p_train),
                    p_test: stat(&|r| r.p_test),
                }
            })
            .collect()
    }

    /// Median test MSE per point.
    pub fn median_test_mse(&self) -> Vec<f64> {
        self.summary().iter().map(|s| s.test_mse.median).collect()
    }
}

/// Nominal raw parameter count: `P_phi`, `P_leaf · P_ens` or `P_boost · P_ens`.
pub fn raw_params(family: Family, point: &SchedulePoint, n_train: usize) -> u64 {
    match family {
        Family::RffLinear => (point.axis1 + point.axis2) as u64,
        Family::Tree => (point.axis1.min(n_train) * point.axis2) as u64,
        Family::Boosting => (point.axis1 * point.axis2) as u64,
    }
}

fn check_seeds(shared: &SharedParams) -> Result<()> {
    if shared.seeds.is_empty() {
        return Err(Error::Argument("at least one seed is required".into()));
    }
    Ok(())
}

/// Evaluates several schedules of one family, fitting each distinct point
/// once per seed. Every schedule is validated before anything is fitted.
pub fn run_many<T: Real>(
    schedules: &[SweepSchedule],
    train: &Dataset<T>,
    test: &Dataset<T>,
    shared: &SharedParams,
) -> Result<Vec<SweepResult>> {
    check_seeds(shared)?;
    let Some(first) = schedules.first() else {
        return Ok(Vec::new());
    };
    let family = first.family;
    for s in schedules {
        if s.family != family {
            return Err(Error::Argument(format!(
                "schedules mix families {} and {}",
                family, s.family
            )));
        }
        s.validate(train.len())?;
    }
    let data = TaskData::new(train, test, shared.eval_class)?;
    let mut unique: BTreeMap<SchedulePoint, usize> = BTreeMap::new();
    for s in schedules {
        for p in &s.points {
            let next = unique.len();
            unique.entry(*p).or_insert(next);
        }
    }
    let mut points = vec![SchedulePoint::new(0, 0); unique.len()];
    for (p, &i) in &unique {
        points[i] = *p;
    }
    let per_seed = shared
        .seeds
        .par_iter()
        .map(|&seed| evaluate_points(family, &data, &points, shared, seed))
        .collect::<Result<Vec<_>>>()?;
    let (a1, a2) = family.axes();
    let n = train.len();
    Ok(schedules
        .iter()
        .map(|s| {
            let mut records = Vec::with_capacity(s.len() * shared.seeds.len());
            for (&seed, evals) in shared.seeds.iter().zip(&per_seed) {
                for (i, p) in s.points.iter().enumerate() {
                    let e = &evals[unique[p]];
                    records.push(SweepRecord {
                        point_index: i,
                        axis1_name: a1.name(),
                        axis1_value: p.axis1,
                        axis2_name: a2.name(),
                        axis2_value: p.axis2,
                        raw_params: raw_params(family, p, n),
                        train_mse: e.train_mse,
                        test_mse: e.test_mse,
                        test_zero_one: e.test_zero_one,
                        p_train: e.p_train,
                        p_test: e.p_test,
                        seed,
                        wall_time: e.wall_time,
                    });
                }
            }
            SweepResult {
                family,
                schedule: s.clone(),
                records,
            }
        })
        .collect())
}

pub fn run_sweep<T: Real>(
    schedule: &SweepSchedule,
    train: &Dataset<T>,
    test: &Dataset<T>,
    shared: &SharedParams,
) -> Result<SweepResult> {
    Ok(run_many(std::slice::from_ref(schedule), train, test, shared)?.remove(0))
}

/// Full cross product of two axis grids.
#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub axis1_values: Vec<usize>,
    pub axis2_values: Vec<usize>,
    /// Points ordered with the first axis varying fastest.
    pub result: SweepResult,
}

impl GridResult {
    /// Summaries along the first axis at `axis2_values[i2]`.
    pub fn axis1_curve(&self, i2: usize) -> Vec<PointSummary> {
        let k = self.axis1_values.len();
        self.result.summary()[i2 * k..(i2 + 1) * k].to_vec()
    }

    /// Summaries along the second axis at `axis1_values[i1]`.
    pub fn axis2_curve(&self, i1: usize) -> Vec<PointSummary> {
        let k = self.axis1_values.len();
        self.result
            .summary()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| i % k == i1)
            .map(|(_, s)| s)
            .collect()
    }
}

pub fn run_grid<T: Real>(
    family: Family,
    axis1_values: &[usize],
    axis2_values: &[usize],
    train: &Dataset<T>,
    test: &Dataset<T>,
    shared: &SharedParams,
) -> Result<GridResult> {
    let points = axis2_values
        .iter()
        .flat_map(|&b| axis1_values.iter().map(move |&a| SchedulePoint::new(a, b)))
        .collect();
    let schedule = SweepSchedule::new(family, points);
    Ok(GridResult {
        axis1_values: axis1_values.to_vec(),
        axis2_values: axis2_values.to_vec(),
        result: run_sweep(&schedule, train, test, shared)?,
    })
}
