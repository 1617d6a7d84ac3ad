//! JSON experiment configuration. Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use smootherlab::dataset::{
    load_csv, load_idx, synth_generate, train_test_split, Dataset, LabelKind, SyntheticSpec,
};
use smootherlab::experiments::{Continuation, Family, Mechanism, SharedParams, SweepSchedule};
use smootherlab::linear_smoothers::PcrScaling;
use smootherlab::{Error, Result};

pub const FULL_SCALE_N_TRAIN: usize = 10_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub dataset: DatasetConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peaks: Option<PeaksConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub back_to_u: Option<BackToUConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<CondConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_design: Option<FixedDesignConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_variance: Option<BiasVarianceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub select: Option<SelectConfig>,
    #[serde(default)]
    pub shared: SharedConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    Idx {
        images: PathBuf,
        labels: PathBuf,
        #[serde(default = "default_n_train")]
        n_train: usize,
        #[serde(default = "default_n_test")]
        n_test: usize,
        #[serde(default)]
        split_seed: u64,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        labels: LabelKindConfig,
        #[serde(default = "default_n_train")]
        n_train: usize,
        #[serde(default = "default_n_test")]
        n_test: usize,
        #[serde(default)]
        split_seed: u64,
    },
    Synthetic {
        true_function: String,
        noise_std: f64,
        #[serde(default = "default_n_train")]
        n_train: usize,
        #[serde(default = "default_n_test")]
        n_test: usize,
        #[serde(default = "default_d")]
        d: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_n_train() -> usize {
    1000
}

fn default_n_test() -> usize {
    2000
}

fn default_d() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKindConfig {
    #[default]
    Auto,
    Classes,
    Continuous,
}

/// An axis value: a count, or `"max"` for the training-set size.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AxisValue {
    Count(usize),
    Word(String),
}

impl AxisValue {
    pub fn resolve(&self, n_train: usize) -> Result<usize> {
        match self {
            AxisValue::Count(v) => Ok(*v),
            AxisValue::Word(w) if w == "max" => Ok(n_train),
            AxisValue::Word(w) => Err(Error::Argument(format!(
                "axis value '{w}' is neither a count nor \"max\""
            ))),
        }
    }
}

pub fn resolve_all(values: &[AxisValue], n_train: usize) -> Result<Vec<usize>> {
    values.iter().map(|v| v.resolve(n_train)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axis1: Vec<AxisValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axis2: Vec<AxisValue>,
    /// Switch mechanisms at this first-axis value (values of `axis1` above it are dropped).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch: Option<AxisValue>,
    /// RFF only: second-axis values chosen so that `P_phi` hits these totals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rff_totals: Option<Vec<usize>>,
    /// Explicit `("first" | "second", value)` steps, overriding the fields above.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<(String, AxisValue)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub axis1: Vec<AxisValue>,
    pub axis2: Vec<AxisValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeaksConfig {
    pub axis1_grid: Vec<AxisValue>,
    pub switches: Vec<AxisValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axis2: Vec<AxisValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rff_totals: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackToUConfig {
    pub axis1_grid: Vec<AxisValue>,
    pub switch: AxisValue,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axis2: Vec<AxisValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rff_totals: Option<Vec<usize>>,
    pub reductions: Vec<AxisValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ols,
    Minnorm,
    SvdBasis,
    Pcr,
    Knn,
    Tree,
    Forest,
    Boost,
    BoostEnsemble,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Random features for linear models; raw inputs when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_phi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_pc: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_leaves: Option<AxisValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_ens: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rounds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondConfig {
    pub p_phi: Vec<usize>,
    pub k: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedDesignConfig {
    /// Raw feature counts of the min-norm fits; `None` means `n, 2n, 8n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_phi: Option<Vec<usize>>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Noise added to resample targets when the dataset has no known truth.
    #[serde(default = "default_resample_noise")]
    pub noise_std: f64,
    #[serde(default)]
    pub resample_seed: u64,
}

fn default_eps() -> f64 {
    1e-4
}

fn default_resample_noise() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BvModelKind {
    SampleMean,
    Ols,
    Knn,
    MinnormRff,
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BvEval {
    #[default]
    Fresh,
    Train,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasVarianceConfig {
    pub model: BvModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_phi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_leaves: Option<usize>,
    #[serde(default = "default_resamples")]
    pub n_resamples: usize,
    #[serde(default)]
    pub eval: BvEval,
    #[serde(default = "default_fresh_points")]
    pub m: usize,
}

fn default_resamples() -> usize {
    2000
}

fn default_fresh_points() -> usize {
    50
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectConfig {
    #[serde(default = "default_leaf_grid")]
    pub leaf_grid: Vec<AxisValue>,
    #[serde(default = "default_lr_grid")]
    pub lr_grid: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
}

fn default_leaf_grid() -> Vec<AxisValue> {
    let mut v: Vec<AxisValue> = [10, 50, 100, 200, 500].into_iter().map(AxisValue::Count).collect();
    v.push(AxisValue::Word("max".into()));
    v
}

fn default_lr_grid() -> Vec<f64> {
    vec![0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.85]
}

fn default_max_rounds() -> usize {
    500
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingConfig {
    #[default]
    Standardize,
    Center,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharedConfig {
    #[serde(default = "default_scale")]
    pub rff_scale: f64,
    #[serde(default)]
    pub pcr_scaling: ScalingConfig,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_leaf_budget")]
    pub leaf_budget: usize,
    #[serde(default)]
    pub max_features: Option<usize>,
    #[serde(default)]
    pub eval_class: usize,
}

fn default_scale() -> f64 {
    smootherlab::rff::DEFAULT_SCALE
}

fn default_learning_rate() -> f64 {
    smootherlab::boosting_smoothers::DEFAULT_LEARNING_RATE
}

fn default_leaf_budget() -> usize {
    smootherlab::boosting_smoothers::DEFAULT_LEAF_BUDGET
}

impl Default for SharedConfig {
    fn default() -> Self {
        Self {
            rff_scale: default_scale(),
            pcr_scaling: ScalingConfig::default(),
            learning_rate: default_learning_rate(),
            leaf_budget: default_leaf_budget(),
            max_features: None,
            eval_class: 0,
        }
    }
}

/// Sets `path` (dot separated) in a JSON object tree, creating objects on the way.
pub fn apply_override(root: &mut Value, path: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut parts = path.split('.').peekable();
    let mut cur = root;
    while let Some(key) = parts.next() {
        if key.is_empty() {
            return Err(Error::Argument(format!("empty key segment in override '{path}'")));
        }
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Argument(format!("override '{path}': '{key}' is not inside an object")))?;
        if parts.peek().is_none() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cur = obj
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

impl Config {
    /// Parses a config file and applies `key=value` overrides before validation.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Format(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("config {}: {e}", path.display())))?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Argument(format!("override '{o}' is not key=value")))?;
            apply_override(&mut value, k.trim(), v.trim())?;
        }
        serde_json::from_value(value).map_err(|e| Error::Format(format!("config {}: {e}", path.display())))
    }

    pub fn family(&self) -> Result<Family> {
        self.family
            .as_deref()
            .ok_or_else(|| Error::Argument("config needs a 'family'".into()))?
            .parse()
    }

    pub fn set_full_scale(&mut self) {
        match &mut self.dataset {
            DatasetConfig::Idx { n_train, .. }
            | DatasetConfig::Csv { n_train, .. }
            | DatasetConfig::Synthetic { n_train, .. } => *n_train = FULL_SCALE_N_TRAIN,
        }
    }

    pub fn shared_params(&self) -> SharedParams {
        SharedParams {
            rff_scale: self.shared.rff_scale,
            pcr_scaling: match self.shared.pcr_scaling {
                ScalingConfig::Standardize => PcrScaling::Standardize,
                ScalingConfig::Center => PcrScaling::Center,
            },
            learning_rate: self.shared.learning_rate,
            leaf_budget: self.shared.leaf_budget,
            max_features: self.shared.max_features,
            eval_class: self.shared.eval_class,
            seeds: self.seeds.clone(),
        }
    }

    pub fn synthetic_spec(&self) -> Option<SyntheticSpec> {
        match &self.dataset {
            DatasetConfig::Synthetic {
                true_function,
                noise_std,
                n_train,
                d,
                seed,
                ..
            } => Some(SyntheticSpec {
                true_function: true_function.clone(),
                noise_std: *noise_std,
                n: *n_train,
                d: *d,
                seed: *seed,
            }),
            _ => None,
        }
    }

    /// Loads the dataset and returns `(train, test)`.
    pub fn load_data(&self) -> Result<(Dataset<f64>, Dataset<f64>)> {
        match &self.dataset {
            DatasetConfig::Idx {
                images,
                labels,
                n_train,
                n_test,
                split_seed,
            } => {
                let ds = load_idx(images, labels)?;
                train_test_split(&ds, *n_train, *n_test, *split_seed)
            }
            DatasetConfig::Csv {
                path,
                labels,
                n_train,
                n_test,
                split_seed,
            } => {
                let kind = match labels {
                    LabelKindConfig::Auto => LabelKind::Auto,
                    LabelKindConfig::Classes => LabelKind::Classes,
                    LabelKindConfig::Continuous => LabelKind::Continuous,
                };
                let ds = load_csv(path, kind)?;
                train_test_split(&ds, *n_train, *n_test, *split_seed)
            }
            DatasetConfig::Synthetic { n_test, .. } => {
                let spec = self.synthetic_spec().expect("synthetic dataset");
                let train = synth_generate(&spec)?.renamed("synthetic-train");
                let test = synth_generate(&SyntheticSpec {
                    n: *n_test,
                    ..spec.with_seed(spec.seed.wrapping_add(1))
                })?
                .renamed("synthetic-test");
                Ok((train, test))
            }
        }
    }
}

fn continuation(
    axis2: &[AxisValue],
    rff_totals: &Option<Vec<usize>>,
    n_train: usize,
) -> Result<Continuation> {
    match rff_totals {
        Some(t) => Ok(Continuation::RffTotals(t.clone())),
        None => Ok(Continuation::Values(resolve_all(axis2, n_train)?)),
    }
}

impl ScheduleConfig {
    pub fn build(&self, family: Family, n_train: usize) -> Result<SweepSchedule> {
        if let Some(steps) = &self.steps {
            let steps = steps
                .iter()
                .map(|(m, v)| {
                    let mech = match m.as_str() {
                        "first" | "axis1" => Mechanism::First,
                        "second" | "axis2" => Mechanism::Second,
                        other => {
                            return Err(Error::Argument(format!(
                                "schedule step mechanism '{other}' is not 'first' or 'second'"
                            )))
                        }
                    };
                    Ok((mech, v.resolve(n_train)?))
                })
                .collect::<Result<Vec<_>>>()?;
            return SweepSchedule::from_steps(family, &steps);
        }
        let axis1 = resolve_all(&self.axis1, n_train)?;
        let switch = match &self.switch {
            Some(s) => s.resolve(n_train)?,
            None => *axis1
                .last()
                .ok_or_else(|| Error::Argument("schedule needs axis1 values".into()))?,
        };
        let after = continuation(&self.axis2, &self.rff_totals, n_train)?.values_after(switch);
        SweepSchedule::switch_at(family, &axis1, switch, &after)
    }
}

impl PeaksConfig {
    pub fn continuation(&self, n_train: usize) -> Result<Continuation> {
        continuation(&self.axis2, &self.rff_totals, n_train)
    }
}

impl BackToUConfig {
    pub fn continuation(&self, n_train: usize) -> Result<Continuation> {
        continuation(&self.axis2, &self.rff_totals, n_train)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Value {
        serde_json::json!({
            "dataset": {"kind": "synthetic", "true_function": "sine", "noise_std": 0.1},
            "family": "tree",
            "schedule": {"axis1": [2, 4, "max"], "axis2": [2, 5]}
        })
    }

    #[test]
    fn overrides_and_unknown_keys() {
        let mut v = base();
        apply_override(&mut v, "shared.learning_rate", "0.5").unwrap();
        apply_override(&mut v, "dataset.n_train", "40").unwrap();
        apply_override(&mut v, "output_dir", "somewhere").unwrap();
        let c: Config = serde_json::from_value(v).unwrap();
        assert_eq!(c.shared.learning_rate, 0.5);
        assert_eq!(c.output_dir, PathBuf::from("somewhere"));
        let s = c.schedule.unwrap().build(Family::Tree, 40).unwrap();
        assert_eq!(s.points.last().unwrap().axis1, 40);
        assert_eq!(s.len(), 5);

        let mut v = base();
        apply_override(&mut v, "shared.learning_rat", "0.5").unwrap();
        assert!(serde_json::from_value::<Config>(v).is_err());
        let mut v = base();
        apply_override(&mut v, "dataset.colour", "1").unwrap();
        assert!(serde_json::from_value::<Config>(v).is_err());
        assert!(apply_override(&mut base(), "family.x", "1").is_err());
    }

    #[test]
    fn axis_words() {
        assert_eq!(AxisValue::Word("max".into()).resolve(7).unwrap(), 7);
        assert!(AxisValue::Word("most".into()).resolve(7).is_err());
    }
}
