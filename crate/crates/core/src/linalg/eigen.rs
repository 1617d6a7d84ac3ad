//! Symmetric eigendecomposition: Householder tridiagonalization followed by
//! the implicit QL algorithm (the EISPACK `tred2`/`tql2` pair).
//!
//! The working matrix is kept transposed so that every inner loop of both
//! phases runs over contiguous memory; on exit row `j` of [`SymmetricEigen::vectors`]
//! is the unit eigenvector belonging to `values[j]`.

use crate::error::{Error, Result};
use crate::linalg::matrix::{axpy, dot, Matrix};
use crate::scalar::Real;

const MAX_QL_ITERATIONS: usize = 64;

#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues in descending order.
    pub values: Vec<T>,
    /// Row `j` is the eigenvector for `values[j]`.
    pub vectors: Matrix<T>,
}

impl<T: Real> SymmetricEigen<T> {
    /// Decomposes a symmetric matrix. Only symmetry up to rounding is assumed;
    /// the lower triangle is what the reduction reads.
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Argument(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if !a.is_finite() {
            return Err(Error::Numerical(
                "eigendecomposition input contains non-finite entries".into(),
            ));
        }
        if n == 0 {
            return Ok(Self {
                values: Vec::new(),
                vectors: Matrix::zeros(0, 0),
            });
        }
        // `w` holds Vᵀ throughout; the input is symmetric so it starts as A.
        let mut w = a.clone();
        let mut d = vec![T::zero(); n];
        let mut e = vec![T::zero(); n];
        tridiagonalize(&mut w, &mut d, &mut e);
        ql_implicit(&mut w, &mut d, &mut e)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| d[i]).collect();
        let vectors = w.select_rows(&order);
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

fn tridiagonalize<T: Real>(w: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = w[(j, n - 1)];
    }

    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for &dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[(j, i - 1)];
                w[(j, i)] = T::zero();
                w[(i, j)] = T::zero();
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = T::zero();
            }

            for j in 0..i {
                f = d[j];
                w[(i, j)] = f;
                g = e[j] + w[(j, j)] * f;
                // Column j of V below the diagonal is row j of `w`.
                let row_j = &w.row(j)[j + 1..i];
                g += dot(row_j, &d[j + 1..i]);
                axpy(f, row_j, &mut e[j + 1..i]);
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let row_j = &mut w.row_mut(j)[j..i];
                for (k, v) in row_j.iter_mut().enumerate() {
                    *v -= f * e[j + k] + g * d[j + k];
                }
                d[j] = w[(j, i - 1)];
                w[(j, i)] = T::zero();
            }
        }
        d[i] = h;
    }

    // Accumulate the Householder transformations.
    for i in 0..n - 1 {
        w[(i, n - 1)] = w[(i, i)];
        w[(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = w[(i + 1, k)] / h;
            }
            for j in 0..=i {
                let g = dot(&w.row(i + 1)[..=i], &w.row(j)[..=i]);
                let row_j = &mut w.row_mut(j)[..=i];
                axpy(-g, &d[..=i], row_j);
            }
        }
        for k in 0..=i {
            w[(i + 1, k)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = w[(j, n - 1)];
        w[(j, n - 1)] = T::zero();
    }
    w[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn ql_implicit<T: Real>(w: &mut Matrix<T>, d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    let two = T::lit(2.0);
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::Numerical(format!(
                        "symmetric QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_rows(w, i, s, c);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Applies the Givens rotation of one QL step to rows `i` and `i + 1`.
#[inline]
fn rotate_rows<T: Real>(w: &mut Matrix<T>, i: usize, s: T, c: T) {
    let n = w.cols();
    let (head, tail) = w.as_mut_slice().split_at_mut((i + 1) * n);
    let ri = &mut head[i * n..];
    let ri1 = &mut tail[..n];
    for (a, b) in ri.iter_mut().zip(ri1.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Matrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        b.gram_rows()
    }

    fn reconstruction_error(a: &Matrix<f64>, eig: &SymmetricEigen<f64>) -> f64 {
        let n = a.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n)
                    .map(|k| eig.values[k] * eig.vectors[(k, i)] * eig.vectors[(k, j)])
                    .sum();
                worst = worst.max((v - a[(i, j)]).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_matrix_is_sorted_descending() {
        let a = Matrix::<f64>::from_vec(3, 3, vec![1.0, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 3.0]);
        let eig = SymmetricEigen::new(&a).unwrap();
        assert_eq!(eig.values, vec![5.0, 3.0, 1.0]);
        assert!((eig.vectors[(0, 1)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2, 1], [1, 2]] has eigenvalues 3 and 1.
        let a = Matrix::<f64>::from_vec(2, 2, vec![2.0, 1.0, 1.0, 2.0]);
        let eig = SymmetricEigen::new(&a).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((eig.vectors[(0, 0)].abs() - h).abs() < 1e-14);
    }

    #[test]
    fn random_matrices_reconstruct_and_are_orthonormal() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (40, 4), (97, 5)] {
            let a = random_symmetric(n, seed);
            let eig = SymmetricEigen::new(&a).unwrap();
            let scale = a.max_abs();
            assert!(reconstruction_error(&a, &eig) < 1e-11 * scale.max(1.0));
            let q = eig.vectors.gram_rows();
            assert!(q.sub(&Matrix::identity(n)).max_abs() < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_deficient_gram_has_zero_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = Matrix::from_fn(6, 2, |_, _| rng.random_range(-1.0..1.0));
        let eig: SymmetricEigen<f64> = SymmetricEigen::new(&b.gram_rows()).unwrap();
        for v in &eig.values[2..] {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(SymmetricEigen::new(&Matrix::<f64>::zeros(2, 3)).is_err());
    }
}
