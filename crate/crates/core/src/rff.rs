//! Random Fourier features `φ_p(x) = cos(v_pᵀ x)` with Gaussian frequencies.
//!
//! Each frequency row is drawn from its own ChaCha stream keyed by
//! `(seed, row)`, so a map with more rows extends a smaller one instead of
//! resampling it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Default standard deviation of the frequency entries.
pub const DEFAULT_SCALE: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct RffMap<T> {
    frequencies: Matrix<T>,
    seed: u64,
    scale: f64,
}

/// Row `row` of the frequency matrix: `d` draws of `N(0, scale²)`.
pub fn frequency_row(seed: u64, row: usize, d: usize, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    (0..d)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

impl<T: Real> RffMap<T> {
    pub fn sample(seed: u64, p_max: usize, d: usize, scale: f64) -> Result<Self> {
        if p_max == 0 || d == 0 {
            return Err(Error::Argument(format!(
                "random features need p_max >= 1 and d >= 1, got {p_max} and {d}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Argument(format!("frequency scale must be > 0, got {scale}")));
        }
        let mut data = Vec::with_capacity(p_max * d);
        for row in 0..p_max {
            data.extend(frequency_row(seed, row, d, scale).into_iter().map(T::lit));
        }
        Ok(Self {
            frequencies: Matrix::from_vec(p_max, d, data),
            seed,
            scale,
        })
    }

    /// Builds a map from explicit frequencies (one row per feature).
    pub fn from_frequencies(frequencies: Matrix<T>) -> Self {
        Self {
            frequencies,
            seed: 0,
            scale: f64::NAN,
        }
    }

    pub fn frequencies(&self) -> &Matrix<T> {
        &self.frequencies
    }

    pub fn p_max(&self) -> usize {
        self.frequencies.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.frequencies.cols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `m × p_phi` matrix with entries `cos(v_pᵀ x_i)` for the first `p_phi` frequencies.
    pub fn transform(&self, x: &Matrix<T>, p_phi: usize) -> Result<Matrix<T>> {
        if p_phi == 0 || p_phi > self.p_max() {
            return Err(Error::Argument(format!(
                "p_phi = {p_phi} outside 1..={}",
                self.p_max()
            )));
        }
        if x.cols() != self.input_dim() {
            return Err(Error::Argument(format!(
                "inputs have {} columns, map expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        let d = self.input_dim();
        let v = Matrix::from_vec(p_phi, d, self.frequencies.as_slice()[..p_phi * d].to_vec());
        let mut out = x.matmul_t(&v);
        for e in out.as_mut_slice() {
            *e = e.cos();
        }
        Ok(out)
    }
}
