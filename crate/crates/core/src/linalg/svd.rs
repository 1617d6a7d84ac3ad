//! Thin singular value decomposition with a rank-revealing cutoff.
//!
//! Two algorithms sit behind [`ThinSvd::new`]:
//! - one-sided (Hestenes) Jacobi when the short side is at most
//!   [`JACOBI_MAX_DIM`]; accurate to working precision for every singular value;
//! - eigendecomposition of the smaller Gram matrix otherwise. This squares the
//!   condition number, so singular values below `sqrt(max(m, n) * eps) * σ₁`
//!   are not resolved and the default cutoff is raised to that noise floor.
//!
//! Only the triplets above the cutoff are kept in `u`/`vt`; every computed
//! singular value is still reported in `singular_values`.

use crate::error::{Error, Result};
use crate::linalg::eigen::SymmetricEigen;
use crate::linalg::matrix::{dot, norm_sq, Matrix};
use crate::scalar::Real;

/// Largest short-side dimension decomposed with the Jacobi method.
pub const JACOBI_MAX_DIM: usize = 200;

const MAX_JACOBI_SWEEPS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvdMethod {
    Jacobi,
    Gram,
}

/// Options controlling the singular value cutoff.
#[derive(Debug, Clone, Copy)]
pub struct SvdOptions {
    /// Relative cutoff multiplier: singular values `<= rtol * max(m, n) * σ₁ * eps`
    /// are treated as zero. Defaults to 1.
    pub rtol: f64,
    /// Forces a specific algorithm; `None` picks by size.
    pub method: Option<SvdMethod>,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            rtol: 1.0,
            method: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThinSvd<T> {
    /// Left singular vectors of the retained triplets (m × r).
    pub u: Matrix<T>,
    /// All `min(m, n)` computed singular values, descending.
    pub singular_values: Vec<T>,
    /// Right singular vectors of the retained triplets as rows (r × n).
    pub vt: Matrix<T>,
    /// Cutoff used to decide the retained rank.
    pub tolerance: T,
    pub method: SvdMethod,
}

impl<T: Real> ThinSvd<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        Self::with_options(a, SvdOptions::default())
    }

    pub fn with_options(a: &Matrix<T>, opts: SvdOptions) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::Argument(format!("cannot decompose an empty {m}x{n} matrix")));
        }
        if !a.is_finite() {
            return Err(Error::Numerical("SVD input contains non-finite entries".into()));
        }
        let method = opts.method.unwrap_or(if m.min(n) <= JACOBI_MAX_DIM {
            SvdMethod::Jacobi
        } else {
            SvdMethod::Gram
        });
        let (u_full, s, vt_full) = match method {
            SvdMethod::Jacobi => jacobi_svd(a)?,
            SvdMethod::Gram => gram_svd(a)?,
        };
        let sigma_max = s.first().copied().unwrap_or_else(T::zero);
        let size = T::from_usize_lossy(m.max(n));
        let mut tolerance = T::lit(opts.rtol) * size * sigma_max * T::epsilon();
        if method == SvdMethod::Gram {
            tolerance = tolerance.max((size * T::epsilon()).sqrt() * sigma_max);
        }
        let rank = s.iter().take_while(|&&v| v > tolerance).count();
        let keep: Vec<usize> = (0..rank).collect();
        Ok(Self {
            u: u_full.select_columns(&keep),
            singular_values: s,
            vt: vt_full.select_rows(&keep),
            tolerance,
            method,
        })
    }

    /// Number of retained singular triplets.
    pub fn rank(&self) -> usize {
        self.vt.rows()
    }

    pub fn retained_values(&self) -> &[T] {
        &self.singular_values[..self.rank()]
    }

    /// Condition number `σ₁ / σ_k` of the leading `k` triplets; infinite when
    /// `k` exceeds the retained rank.
    pub fn condition_number(&self, k: usize) -> T {
        if k == 0 || k > self.rank() {
            return T::infinity();
        }
        self.singular_values[0] / self.singular_values[k - 1]
    }

    /// Minimum-norm least-squares solution `A⁺ b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let utb = self.u.t_matvec(b);
        let scaled: Vec<T> = utb
            .iter()
            .zip(self.retained_values())
            .map(|(&c, &s)| c / s)
            .collect();
        self.vt.t_matvec(&scaled)
    }
}

/// Returns (U, σ, Vᵀ) with `min(m, n)` columns/rows, σ descending.
fn jacobi_svd<T: Real>(a: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>, Matrix<T>)> {
    let (m, n) = a.shape();
    if m >= n {
        // Orthogonalize the columns of A, stored as rows of Aᵀ.
        let (w, r) = orthogonalize_rows(a.transpose())?;
        Ok(finish_jacobi(w, r, false))
    } else {
        let (w, r) = orthogonalize_rows(a.clone())?;
        Ok(finish_jacobi(w, r, true))
    }
}

/// One-sided Jacobi on the rows of `w` (k × len). Returns the rotated rows
/// and the accumulated k × k rotation.
fn orthogonalize_rows<T: Real>(mut w: Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let k = w.rows();
    let len = w.cols();
    let mut r = Matrix::identity(k);
    let eps = T::epsilon();
    let mut norms: Vec<T> = (0..k).map(|i| norm_sq(w.row(i))).collect();
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = norms[p];
                let beta = norms[q];
                let gamma = dot(w.row(p), w.row(q));
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_pair(w.as_mut_slice(), len, p, q, c, s);
                rotate_pair(r.as_mut_slice(), k, p, q, c, s);
                norms[p] = norm_sq(w.row(p));
                norms[q] = norm_sq(w.row(q));
            }
        }
        if !rotated {
            return Ok((w, r));
        }
    }
    Err(Error::Numerical("Jacobi SVD did not converge".into()))
}

#[inline]
fn rotate_pair<T: Real>(data: &mut [T], len: usize, p: usize, q: usize, c: T, s: T) {
    debug_assert!(p < q);
    let (head, tail) = data.split_at_mut(q * len);
    let rp = &mut head[p * len..(p + 1) * len];
    let rq = &mut tail[..len];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let a = *x;
        let b = *y;
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Turns orthogonalized rows into sorted singular triplets. When
/// `transposed` is false the rows of `w` are σ_j u_jᵀ and the rows of `r`
/// are v_jᵀ; when true the roles of u and v swap.
fn finish_jacobi<T: Real>(
    w: Matrix<T>,
    r: Matrix<T>,
    transposed: bool,
) -> (Matrix<T>, Vec<T>, Matrix<T>) {
    let k = w.rows();
    let len = w.cols();
    let mut sig: Vec<(T, usize)> = (0..k).map(|i| (norm_sq(w.row(i)).sqrt(), i)).collect();
    sig.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<T> = sig.iter().map(|&(v, _)| v).collect();
    // Unit vectors from the rotated rows (left side when not transposed).
    let mut unit = Matrix::zeros(k, len);
    for (dst, &(sv, src)) in sig.iter().enumerate() {
        if sv > T::zero() {
            for (o, &x) in unit.row_mut(dst).iter_mut().zip(w.row(src)) {
                *o = x / sv;
            }
        }
    }
    let order: Vec<usize> = sig.iter().map(|&(_, i)| i).collect();
    let other = r.select_rows(&order);
    if transposed {
        // A = Σ σ_j r_j unit_jᵀ: u columns are the rows of `other`.
        (other.transpose(), s, unit)
    } else {
        (unit.transpose(), s, other)
    }
}

fn gram_svd<T: Real>(a: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>, Matrix<T>)> {
    let (m, n) = a.shape();
    if m <= n {
        // A Aᵀ = U Σ² Uᵀ, then Vᵀ = Σ⁻¹ Uᵀ A.
        let eig = SymmetricEigen::new(&a.gram_rows())?;
        let s: Vec<T> = eig.values.iter().map(|&l| l.max(T::zero()).sqrt()).collect();
        let mut vt = eig.vectors.matmul(a);
        scale_rows_by_inverse(&mut vt, &s);
        Ok((eig.vectors.transpose(), s, vt))
    } else {
        // AᵀA = V Σ² Vᵀ, then U = A V Σ⁻¹.
        let eig = SymmetricEigen::new(&a.gram_cols())?;
        let s: Vec<T> = eig.values.iter().map(|&l| l.max(T::zero()).sqrt()).collect();
        let mut ut = eig.vectors.matmul_t(a);
        scale_rows_by_inverse(&mut ut, &s);
        Ok((ut.transpose(), s, eig.vectors))
    }
}

fn scale_rows_by_inverse<T: Real>(m: &mut Matrix<T>, s: &[T]) {
    for (i, &sv) in s.iter().enumerate() {
        let inv = if sv > T::zero() { T::one() / sv } else { T::zero() };
        m.row_mut(i).iter_mut().for_each(|v| *v *= inv);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(m: usize, n: usize, seed: u64) -> Matrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng))
    }

    fn reconstruct(svd: &ThinSvd<f64>) -> Matrix<f64> {
        let r = svd.rank();
        let mut us = svd.u.clone();
        for i in 0..us.rows() {
            for j in 0..r {
                us[(i, j)] *= svd.singular_values[j];
            }
        }
        us.matmul(&svd.vt)
    }

    #[test]
    fn both_methods_reconstruct_tall_and_wide() {
        for (m, n, seed) in [(9, 4, 1), (4, 9, 2), (6, 6, 3), (30, 80, 4), (80, 30, 5)] {
            let a = gaussian(m, n, seed);
            for method in [SvdMethod::Jacobi, SvdMethod::Gram] {
                let svd = ThinSvd::with_options(
                    &a,
                    SvdOptions {
                        method: Some(method),
                        ..Default::default()
                    },
                )
                .unwrap();
                assert_eq!(svd.rank(), m.min(n));
                let err = reconstruct(&svd).sub(&a).max_abs();
                assert!(err < 1e-10, "{method:?} {m}x{n}: {err}");
                let utu = svd.u.gram_cols();
                assert!(utu.sub(&Matrix::identity(svd.rank())).max_abs() < 1e-10);
                let vvt = svd.vt.gram_rows();
                assert!(vvt.sub(&Matrix::identity(svd.rank())).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn methods_agree_on_singular_values() {
        let a = gaussian(25, 60, 9);
        let j = ThinSvd::with_options(
            &a,
            SvdOptions {
                method: Some(SvdMethod::Jacobi),
                ..Default::default()
            },
        )
        .unwrap();
        let g = ThinSvd::with_options(
            &a,
            SvdOptions {
                method: Some(SvdMethod::Gram),
                ..Default::default()
            },
        )
        .unwrap();
        for (x, y) in j.singular_values.iter().zip(&g.singular_values) {
            assert!((x - y).abs() < 1e-10 * j.singular_values[0]);
        }
    }

    #[test]
    fn rank_deficiency_is_detected() {
        // Third column is the sum of the first two.
        let a = Matrix::from_fn(5, 3, |i, j| {
            let x = (i as f64 + 1.0).sin();
            let y = (i as f64 * 0.7).cos();
            [x, y, x + y][j]
        });
        let svd = ThinSvd::new(&a).unwrap();
        assert_eq!(svd.rank(), 2);
        assert!(svd.condition_number(3).is_infinite());
        assert!((svd.condition_number(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_values_are_exact() {
        let a = Matrix::from_vec(2, 3, vec![3.0, 0.0, 0.0, 0.0, -4.0, 0.0]);
        let svd = ThinSvd::new(&a).unwrap();
        assert_eq!(svd.singular_values, vec![4.0, 3.0]);
        assert_eq!(svd.condition_number(2), 4.0 / 3.0);
    }

    #[test]
    fn pseudo_inverse_solution_has_minimum_norm() {
        let a = Matrix::<f64>::from_vec(1, 2, vec![1.0, 1.0]);
        let x = ThinSvd::new(&a).unwrap().solve(&[2.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }
}
