//! Dense linear algebra over [`Real`](crate::Real) scalars.

pub mod eigen;
pub mod lu;
pub mod matrix;
pub mod svd;

pub use eigen::SymmetricEigen;
pub use lu::Lu;
pub use matrix::{axpy, dot, norm_sq, Matrix};
pub use svd::{SvdMethod, SvdOptions, ThinSvd};
