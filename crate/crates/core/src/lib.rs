//! Regression models viewed as smoothers.
//!
//! Linear regressions on random Fourier features, regression trees, forests
//! and gradient boosting all predict `f̂(x₀) = ŝ(x₀) · y`. This crate fits
//! those models, exposes their weight vectors `ŝ(x₀)`, measures generalized
//! effective parameter counts and runs the sweep experiments built on them.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod boosting_smoothers;
pub mod dataset;
pub mod effective_params;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod linear_smoothers;
pub mod rff;
pub mod scalar;
pub mod smoother;
pub mod tree_smoothers;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use scalar::Real;
pub use smoother::{KnnSmoother, Smoother, SmootherWeights};

pub type Matrix64 = Matrix<f64>;
pub type Dataset64 = dataset::Dataset<f64>;
pub type LinearFit64 = linear_smoothers::LinearFit<f64>;
pub type RffMap64 = rff::RffMap<f64>;
pub type RegressionTree64 = tree_smoothers::RegressionTree<f64>;
pub type TreeEnsemble64 = tree_smoothers::TreeEnsemble<f64>;
pub type BoostedModel64 = boosting_smoothers::BoostedModel<f64>;
pub type BoostedEnsemble64 = boosting_smoothers::BoostedEnsemble<f64>;
