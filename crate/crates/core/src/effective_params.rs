//! Effective parameter counts of smoothers.
//!
//! The generalized count over an input set `I₀` is
//! `p⁰ = (n / |I₀|) Σ_j ‖ŝ(x⁰_j)‖²`; on the training inputs it reduces to
//! `tr(ŜŜᵀ)`. The classical train-time traces and the Hessian eigenvalue
//! proxy for linear regression are provided for comparison.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, Matrix, ThinSvd};
use crate::scalar::Real;
use crate::smoother::Smoother;

/// Rows per batch when materializing weights; bounds memory at `BATCH × n`.
const BATCH: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct EffParamsReport {
    pub input_set_name: String,
    pub set_size: usize,
    pub n_train: usize,
    pub p_generalized: f64,
    /// `‖ŝ(x⁰_j)‖²` for every evaluation input, in input order.
    pub per_point_norms: Vec<f64>,
    /// Implied neighbourhood size `n / p⁰`.
    pub effective_knn: f64,
}

impl EffParamsReport {
    pub fn from_norms(name: impl Into<String>, n_train: usize, norms: Vec<f64>) -> Result<Self> {
        if norms.is_empty() {
            return Err(Error::Argument("effective parameters need at least one input".into()));
        }
        let m = norms.len();
        let p = n_train as f64 / m as f64 * norms.iter().sum::<f64>();
        Ok(Self {
            input_set_name: name.into(),
            set_size: m,
            n_train,
            p_generalized: p,
            per_point_norms: norms,
            effective_knn: n_train as f64 / p,
        })
    }
}

/// Generalized count from explicit weight rows (`m × n`).
pub fn eff_params_from_weights<T: Real>(
    weights: &Matrix<T>,
    name: impl Into<String>,
) -> Result<EffParamsReport> {
    let norms = weights.row_iter().map(|r| norm_sq(r).to_f64_lossy()).collect();
    EffParamsReport::from_norms(name, weights.cols(), norms)
}

/// Generalized count of `model` over the rows of `inputs`.
pub fn generalized_eff_params<T: Real, S: Smoother<T> + ?Sized>(
    model: &S,
    inputs: &Matrix<T>,
    name: impl Into<String>,
) -> Result<EffParamsReport> {
    if inputs.rows() == 0 {
        return Err(Error::Argument("effective parameters need at least one input".into()));
    }
    let starts: Vec<usize> = (0..inputs.rows()).step_by(BATCH).collect();
    let chunks = starts
        .par_iter()
        .map(|&s| {
            let idx: Vec<usize> = (s..(s + BATCH).min(inputs.rows())).collect();
            let w = model.weight_matrix(&inputs.select_rows(&idx))?;
            Ok(w.row_iter().map(|r| norm_sq(r).to_f64_lossy()).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    EffParamsReport::from_norms(name, model.n_train(), chunks.concat())
}

/// The three classical train-time definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalEffParams {
    /// `tr(Ŝ)`.
    pub p_cov: f64,
    /// `tr(2Ŝ − ŜŜᵀ)`.
    pub p_err: f64,
    /// `tr(ŜŜᵀ)`.
    pub p_var: f64,
}

pub fn train_eff_params_classical<T: Real>(hat: &Matrix<T>) -> Result<ClassicalEffParams> {
    if hat.rows() != hat.cols() {
        return Err(Error::Argument(format!(
            "smoother matrix must be square, got {}x{}",
            hat.rows(),
            hat.cols()
        )));
    }
    let tr = hat.trace().to_f64_lossy();
    let var = norm_sq(hat.as_slice()).to_f64_lossy();
    Ok(ClassicalEffParams {
        p_cov: tr,
        p_err: 2.0 * tr - var,
        p_var: var,
    })
}

/// `Σ θ_j / (θ_j + α)` over given Hessian eigenvalues.
pub fn hessian_proxy_from_eigenvalues(theta: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::Argument(format!("alpha must be >= 0, got {alpha}")));
    }
    if alpha.is_infinite() {
        return Ok(0.0);
    }
    Ok(theta
        .iter()
        .filter(|&&t| t > 0.0)
        .map(|&t| t / (t + alpha))
        .sum())
}

/// Hessian proxy for linear regression on `phi`: the eigenvalues of `ΦᵀΦ`
/// are the squared singular values retained above the SVD cutoff.
pub fn hessian_proxy_eff_params<T: Real>(phi: &Matrix<T>, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::Argument(format!("alpha must be >= 0, got {alpha}")));
    }
    let svd = ThinSvd::new(phi)?;
    let theta: Vec<f64> = svd
        .retained_values()
        .iter()
        .map(|s| s.to_f64_lossy().powi(2))
        .collect();
    hessian_proxy_from_eigenvalues(&theta, alpha)
}

pub const REPORT_HEADER: [&str; 6] = [
    "config_id",
    "set_name",
    "set_size",
    "n_train",
    "p_generalized",
    "effective_knn",
];

/// Writes one CSV row per `(config id, report)`.
pub fn write_reports_csv<W: Write>(out: W, rows: &[(String, EffParamsReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| Error::Format(format!("writing report: {e}"));
    w.write_record(REPORT_HEADER).map_err(fmt)?;
    for (id, r) in rows {
        w.write_record([
            id.clone(),
            r.input_set_name.clone(),
            r.set_size.to_string(),
            r.n_train.to_string(),
            r.p_generalized.to_string(),
            r.effective_knn.to_string(),
        ])
        .map_err(fmt)?;
    }
    w.flush()
        .map_err(|e| Error::Format(format!("writing report: {e}")))?;
    Ok(())
}
