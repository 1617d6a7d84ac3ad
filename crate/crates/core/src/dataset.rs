//! Datasets: IDX and CSV ingestion, synthetic regression data, sub-sampling
//! and one-vs-all task construction.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
const IDX_MATRIX_MAGIC: u32 = 0x0000_0802;
const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;

/// Feature matrix plus targets, optionally with integer class labels and the
/// noiseless regression function evaluated at every row.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    name: String,
    features: Matrix<T>,
    targets: Vec<T>,
    class_labels: Option<Vec<usize>>,
    truth: Option<Vec<T>>,
}

impl<T: Real> Dataset<T> {
    pub fn new(
        name: impl Into<String>,
        features: Matrix<T>,
        targets: Vec<T>,
        class_labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let (n, d) = features.shape();
        if n == 0 || d == 0 {
            return Err(Error::Argument(format!("dataset must be non-empty, got {n}x{d}")));
        }
        if targets.len() != n {
            return Err(Error::Consistency(format!(
                "{n} feature rows but {} targets",
                targets.len()
            )));
        }
        if let Some(labels) = &class_labels {
            if labels.len() != n {
                return Err(Error::Consistency(format!(
                    "{n} feature rows but {} class labels",
                    labels.len()
                )));
            }
        }
        if !features.is_finite() || targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::Argument("dataset contains non-finite values".into()));
        }
        Ok(Self {
            name: name.into(),
            features,
            targets,
            class_labels,
            truth: None,
        })
    }

    /// Attaches noiseless values f*(x_i) for bias/variance diagnostics.
    pub fn with_truth(mut self, truth: Vec<T>) -> Result<Self> {
        if truth.len() != self.len() {
            return Err(Error::Consistency(format!(
                "{} rows but {} ground-truth values",
                self.len(),
                truth.len()
            )));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn class_labels(&self) -> Option<&[usize]> {
        self.class_labels.as_deref()
    }

    pub fn truth(&self) -> Option<&[T]> {
        self.truth.as_deref()
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// `max(label) + 1`, or `None` for regression data.
    pub fn num_classes(&self) -> Option<usize> {
        self.class_labels
            .as_ref()
            .map(|l| l.iter().copied().max().map_or(0, |m| m + 1))
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Rows `idx` in the given order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        if idx.is_empty() {
            return Err(Error::Argument("empty subset".into()));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Argument(format!(
                "row {bad} out of range for {} rows",
                self.len()
            )));
        }
        Ok(Self {
            name: self.name.clone(),
            features: self.features.select_rows(idx),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
            class_labels: self
                .class_labels
                .as_ref()
                .map(|l| idx.iter().map(|&i| l[i]).collect()),
            truth: self
                .truth
                .as_ref()
                .map(|t| idx.iter().map(|&i| t[i]).collect()),
        })
    }

    /// Per-column min-max scaling to [0, 1]; constant columns become 0.
    pub fn normalize(&self) -> Self {
        let mut out = self.clone();
        min_max_scale(&mut out.features);
        out
    }
}

fn min_max_scale<T: Real>(x: &mut Matrix<T>) {
    let (n, d) = x.shape();
    let mut lo = vec![T::infinity(); d];
    let mut hi = vec![T::neg_infinity(); d];
    for row in x.row_iter() {
        for j in 0..d {
            lo[j] = lo[j].min(row[j]);
            hi[j] = hi[j].max(row[j]);
        }
    }
    for i in 0..n {
        let row = x.row_mut(i);
        for j in 0..d {
            let range = hi[j] - lo[j];
            row[j] = if range > T::zero() {
                (row[j] - lo[j]) / range
            } else {
                T::zero()
            };
        }
    }
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::Format(format!("{}: bad gzip stream: {e}", path.display())))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

struct Idx {
    dims: Vec<usize>,
    data: Vec<u8>,
}

fn parse_idx(bytes: &[u8], allowed: &[u32], what: &str) -> Result<Idx> {
    let word = |at: usize| -> Result<u32> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| Error::Format(format!("{what}: truncated IDX header")))
    };
    let magic = word(0)?;
    if !allowed.contains(&magic) {
        return Err(Error::Format(format!(
            "{what}: bad IDX magic number {magic:#010x}"
        )));
    }
    let ndim = (magic & 0xff) as usize;
    let mut dims = Vec::with_capacity(ndim);
    for k in 0..ndim {
        dims.push(word(4 + 4 * k)? as usize);
    }
    let start = 4 + 4 * ndim;
    let len: usize = dims.iter().product();
    let data = bytes
        .get(start..start + len)
        .ok_or_else(|| {
            Error::Format(format!(
                "{what}: truncated IDX payload, expected {len} bytes after the header, found {}",
                bytes.len().saturating_sub(start)
            ))
        })?
        .to_vec();
    Ok(Idx { dims, data })
}

/// Loads an IDX image/label pair (optionally gzip-compressed). Pixels are
/// divided by 255 and every image is flattened row-major.
pub fn load_idx<T: Real>(images_path: &Path, labels_path: &Path) -> Result<Dataset<T>> {
    let images = parse_idx(
        &read_maybe_gz(images_path)?,
        &[IDX_IMAGES_MAGIC, IDX_MATRIX_MAGIC],
        &images_path.display().to_string(),
    )?;
    let labels = parse_idx(
        &read_maybe_gz(labels_path)?,
        &[IDX_LABELS_MAGIC],
        &labels_path.display().to_string(),
    )?;
    let n = images.dims[0];
    if labels.dims[0] != n {
        return Err(Error::Consistency(format!(
            "{n} images but {} labels",
            labels.dims[0]
        )));
    }
    let d: usize = images.dims[1..].iter().product();
    let scale = T::lit(255.0);
    let features = Matrix::from_vec(
        n,
        d,
        images
            .data
            .iter()
            .map(|&b| T::lit(f64::from(b)) / scale)
            .collect(),
    );
    let class_labels: Vec<usize> = labels.data.iter().map(|&b| b as usize).collect();
    let targets = class_labels.iter().map(|&c| T::from_usize_lossy(c)).collect();
    let name = images_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "idx".into());
    Dataset::new(name, features, targets, Some(class_labels))
}

/// How the last CSV column is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelKind {
    /// Class labels when every value is a non-negative integer, otherwise continuous.
    #[default]
    Auto,
    Classes,
    Continuous,
}

/// Loads a CSV file with a header row; the last column is the label and the
/// remaining columns are min-max scaled to [0, 1].
pub fn load_csv<T: Real>(path: &Path, kind: LabelKind) -> Result<Dataset<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let width = reader.headers().map_err(|e| csv_error(path, e))?.len();
    if width < 2 {
        return Err(Error::Format(format!(
            "{}: need at least one feature column and a label column",
            path.display()
        )));
    }
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Format(format!(
                    "{}: record {}, column {}: '{}' is not numeric",
                    path.display(),
                    line + 1,
                    col + 1,
                    field
                ))
            })?;
            if col + 1 == width {
                labels.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = labels.len();
    let integral = labels.iter().all(|&v| v >= 0.0 && v.fract() == 0.0);
    let as_classes = match kind {
        LabelKind::Auto => integral,
        LabelKind::Classes if !integral => {
            return Err(Error::Format(format!(
                "{}: class labels must be non-negative integers",
                path.display()
            )))
        }
        LabelKind::Classes => true,
        LabelKind::Continuous => false,
    };
    let mut features = Matrix::from_vec(n, width - 1, values.into_iter().map(T::lit).collect());
    min_max_scale(&mut features);
    let targets = labels.iter().map(|&v| T::lit(v)).collect();
    let class_labels = as_classes.then(|| labels.iter().map(|&v| v as usize).collect());
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    Dataset::new(name, features, targets, class_labels)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    }
}

/// Draws `n_sub` rows without replacement. With `balanced`, class counts
/// differ by at most one whenever every class has enough rows.
pub fn subsample<T: Real>(
    ds: &Dataset<T>,
    n_sub: usize,
    seed: u64,
    balanced: bool,
) -> Result<Dataset<T>> {
    let n = ds.len();
    if n_sub == 0 || n_sub > n {
        return Err(Error::Argument(format!(
            "cannot draw {n_sub} rows from a dataset of {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = match (balanced, ds.class_labels()) {
        (true, Some(labels)) => balanced_indices(labels, n_sub, &mut rng),
        (true, None) => {
            return Err(Error::Argument(
                "balanced subsampling needs class labels".into(),
            ))
        }
        (false, _) => {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            all.truncate(n_sub);
            all
        }
    };
    chosen.shuffle(&mut rng);
    ds.subset(&chosen)
}

fn balanced_indices(labels: &[usize], n_sub: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pools: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        pools.entry(c).or_default().push(i);
    }
    for pool in pools.values_mut() {
        pool.shuffle(rng);
    }
    // Round-robin over classes; classes that run dry drop out.
    let mut pools: Vec<Vec<usize>> = pools.into_values().collect();
    let mut taken = vec![0usize; pools.len()];
    let mut out = Vec::with_capacity(n_sub);
    while out.len() < n_sub {
        for (k, pool) in pools.iter_mut().enumerate() {
            if out.len() == n_sub {
                break;
            }
            if taken[k] < pool.len() {
                out.push(pool[taken[k]]);
                taken[k] += 1;
            }
        }
    }
    out
}

/// Splits a random permutation of the rows into disjoint train and test sets.
pub fn train_test_split<T: Real>(
    ds: &Dataset<T>,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>)> {
    if n_train == 0 || n_test == 0 || n_train + n_test > ds.len() {
        return Err(Error::Argument(format!(
            "cannot split {} rows into {n_train} train and {n_test} test rows",
            ds.len()
        )));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = ds.subset(&idx[..n_train])?.renamed(format!("{}-train", ds.name()));
    let test = ds
        .subset(&idx[n_train..n_train + n_test])?
        .renamed(format!("{}-test", ds.name()));
    Ok((train, test))
}

/// Binary {0, 1} regression targets for one class against the rest.
#[derive(Debug, Clone)]
pub struct OneVsAllTask<'a, T> {
    pub base: &'a Dataset<T>,
    pub class_index: usize,
    pub binary_targets: Vec<T>,
}

pub fn one_vs_all<T: Real>(ds: &Dataset<T>) -> Result<Vec<OneVsAllTask<'_, T>>> {
    let labels = ds
        .class_labels()
        .ok_or_else(|| Error::Argument(format!("dataset '{}' has no class labels", ds.name())))?;
    let classes = ds.num_classes().unwrap_or(0);
    if classes < 2 {
        return Err(Error::Argument(format!(
            "one-vs-all needs at least two classes, found {classes}"
        )));
    }
    Ok((0..classes)
        .map(|c| OneVsAllTask {
            base: ds,
            class_index: c,
            binary_targets: labels
                .iter()
                .map(|&l| if l == c { T::one() } else { T::zero() })
                .collect(),
        })
        .collect())
}

/// Named regression functions on [0, 1]^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrueFunction {
    /// f ≡ 0.
    Zero,
    /// `Σ_j x_j / (j + 1)`.
    Linear,
    /// `sin(2π x_0)`.
    Sine,
    /// `Σ_j (x_j − ½)²`.
    Quadratic,
    /// Friedman #1; needs d ≥ 5.
    Friedman1,
}

impl TrueFunction {
    pub const NAMES: [&'static str; 5] = ["zero", "linear", "sine", "quadratic", "friedman1"];

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "zero" => Ok(Self::Zero),
            "linear" => Ok(Self::Linear),
            "sine" => Ok(Self::Sine),
            "quadratic" => Ok(Self::Quadratic),
            "friedman1" => Ok(Self::Friedman1),
            other => Err(Error::Argument(format!(
                "unknown generator '{other}', expected one of {:?}",
                Self::NAMES
            ))),
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Linear => x.iter().enumerate().map(|(j, v)| v / (j + 1) as f64).sum(),
            Self::Sine => (2.0 * std::f64::consts::PI * x[0]).sin(),
            Self::Quadratic => x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum(),
            Self::Friedman1 => {
                10.0 * (std::f64::consts::PI * x[0] * x[1]).sin()
                    + 20.0 * (x[2] - 0.5).powi(2)
                    + 10.0 * x[3]
                    + 5.0 * x[4]
            }
        }
    }

    fn min_dim(self) -> usize {
        match self {
            Self::Friedman1 => 5,
            _ => 1,
        }
    }
}

/// Recipe for a synthetic regression dataset with uniform inputs on [0, 1]^d.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub true_function: String,
    pub noise_std: f64,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// `y_i = f*(x_i) + ε_i` with Gaussian noise; f*(x_i) is kept as the truth.
/// Values are drawn in f64 and converted, so a seed gives identical data
/// regardless of other state.
pub fn synth_generate<T: Real>(spec: &SyntheticSpec) -> Result<Dataset<T>> {
    let f = TrueFunction::from_name(&spec.true_function)?;
    if !(spec.noise_std >= 0.0) || !spec.noise_std.is_finite() {
        return Err(Error::Argument(format!(
            "noise_std must be finite and >= 0, got {}",
            spec.noise_std
        )));
    }
    if spec.n == 0 || spec.d < f.min_dim() {
        return Err(Error::Argument(format!(
            "generator '{}' needs n >= 1 and d >= {}, got n={} d={}",
            spec.true_function,
            f.min_dim(),
            spec.n,
            spec.d
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = vec![0.0f64; spec.n * spec.d];
    for v in &mut x {
        *v = rng.random::<f64>();
    }
    let truth: Vec<f64> = x.chunks(spec.d).map(|row| f.eval(row)).collect();
    let targets: Vec<T> = truth
        .iter()
        .map(|&t| {
            let eps: f64 = rng.sample(StandardNormal);
            T::lit(t + spec.noise_std * eps)
        })
        .collect();
    let features = Matrix::from_vec(spec.n, spec.d, x.into_iter().map(T::lit).collect());
    Dataset::new(
        format!("{}-n{}-d{}-s{}", spec.true_function, spec.n, spec.d, spec.seed),
        features,
        targets,
        None,
    )?
    .with_truth(truth.into_iter().map(T::lit).collect())
}
