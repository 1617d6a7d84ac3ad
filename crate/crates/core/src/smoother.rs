//! The smoother abstraction: a fitted model whose prediction at `x₀` is a
//! weighted sum `ŝ(x₀) · y` of its training targets.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, Matrix};
use crate::scalar::Real;

/// Weight vector `ŝ(x₀)` over the `n` training targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherWeights<T> {
    pub weights: Vec<T>,
}

impl<T: Real> SmootherWeights<T> {
    pub fn new(weights: Vec<T>) -> Self {
        Self { weights }
    }

    /// `ŝ(x₀) · y`.
    pub fn apply(&self, y: &[T]) -> T {
        dot(&self.weights, y)
    }

    pub fn norm_sq(&self) -> T {
        norm_sq(&self.weights)
    }

    pub fn sum(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// A fitted model exposing its smoother weights.
///
/// Inputs are whatever the model was trained on: raw rows for trees and
/// nearest neighbours, feature rows for linear fits.
pub trait Smoother<T: Real>: Send + Sync {
    /// Number of training targets the weights range over.
    fn n_train(&self) -> usize;

    fn predict(&self, inputs: &Matrix<T>) -> Result<Vec<T>>;

    /// One weight row per input (`m × n`).
    fn weight_matrix(&self, inputs: &Matrix<T>) -> Result<Matrix<T>>;

    fn weights(&self, x0: &[T]) -> Result<SmootherWeights<T>> {
        let w = self.weight_matrix(&Matrix::from_vec(1, x0.len(), x0.to_vec()))?;
        Ok(SmootherWeights::new(w.into_vec()))
    }

    /// Short label used in reports.
    fn label(&self) -> String;
}

/// k-nearest-neighbour regression under Euclidean distance; ties are broken
/// by the lower training index.
#[derive(Debug, Clone)]
pub struct KnnSmoother<T> {
    x: Matrix<T>,
    y: Vec<T>,
    k: usize,
}

impl<T: Real> KnnSmoother<T> {
    pub fn fit(x: &Matrix<T>, y: &[T], k: usize) -> Result<Self> {
        if k == 0 || k > x.rows() {
            return Err(Error::Argument(format!(
                "k = {k} must lie in 1..={}",
                x.rows()
            )));
        }
        if y.len() != x.rows() {
            return Err(Error::Consistency(format!(
                "{} rows but {} targets",
                x.rows(),
                y.len()
            )));
        }
        Ok(Self {
            x: x.clone(),
            y: y.to_vec(),
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn neighbours(&self, x0: &[T]) -> Vec<usize> {
        let mut dist: Vec<(T, usize)> = self
            .x
            .row_iter()
            .enumerate()
            .map(|(i, row)| {
                let d: T = row.iter().zip(x0).map(|(&a, &b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        dist.into_iter().take(self.k).map(|(_, i)| i).collect()
    }

    fn check(&self, inputs: &Matrix<T>) -> Result<()> {
        if inputs.cols() != self.x.cols() {
            return Err(Error::Argument(format!(
                "inputs have {} columns, model expects {}",
                inputs.cols(),
                self.x.cols()
            )));
        }
        Ok(())
    }
}

impl<T: Real> Smoother<T> for KnnSmoother<T> {
    fn n_train(&self) -> usize {
        self.x.rows()
    }

    fn predict(&self, inputs: &Matrix<T>) -> Result<Vec<T>> {
        self.check(inputs)?;
        let k = T::from_usize_lossy(self.k);
        Ok(inputs
            .row_iter()
            .map(|x0| self.neighbours(x0).iter().map(|&i| self.y[i]).sum::<T>() / k)
            .collect())
    }

    fn weight_matrix(&self, inputs: &Matrix<T>) -> Result<Matrix<T>> {
        self.check(inputs)?;
        let w = T::one() / T::from_usize_lossy(self.k);
        let mut out = Matrix::zeros(inputs.rows(), self.n_train());
        for (r, x0) in inputs.row_iter().enumerate() {
            for i in self.neighbours(x0) {
                out[(r, i)] = w;
            }
        }
        Ok(out)
    }

    fn label(&self) -> String {
        format!("knn(k={})", self.k)
    }
}
