//! Least-squares fits as linear smoothers: OLS, minimum-norm interpolation,
//! regression on the SVD basis `B = UΣ`, and principal component regression.
//!
//! Every fit keeps a factored weight operator so that the smoother weights
//! `ŝ(x₀)` of any input can be produced without refitting; the coefficients
//! are that same operator applied to the training targets.

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix, SvdOptions, SymmetricEigen, ThinSvd};
use crate::scalar::Real;
use crate::smoother::{Smoother, SmootherWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    Ols,
    MinNorm,
    SvdBasis,
    Pcr,
}

impl FitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMode::Ols => "ols",
            FitMode::MinNorm => "min_norm",
            FitMode::SvdBasis => "svd_basis",
            FitMode::Pcr => "pcr",
        }
    }
}

/// Column preprocessing applied before principal component regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PcrScaling {
    /// Zero mean and unit (population) standard deviation.
    #[default]
    Standardize,
    /// Zero mean only.
    Center,
}

/// Column centering/scaling fitted on a training design. Columns with zero
/// variance are dropped.
#[derive(Debug, Clone)]
pub struct Scaler<T> {
    means: Vec<T>,
    scales: Vec<T>,
    keep: Vec<usize>,
    input_cols: usize,
}

impl<T: Real> Scaler<T> {
    pub fn fit(phi: &Matrix<T>, scaling: PcrScaling) -> Self {
        let (n, p) = phi.shape();
        let nf = T::from_usize_lossy(n);
        let mut means = vec![T::zero(); p];
        let mut max_abs = vec![T::zero(); p];
        for row in phi.row_iter() {
            for j in 0..p {
                means[j] += row[j];
                max_abs[j] = max_abs[j].max(row[j].abs());
            }
        }
        for m in &mut means {
            *m /= nf;
        }
        let mut var = vec![T::zero(); p];
        for row in phi.row_iter() {
            for j in 0..p {
                let c = row[j] - means[j];
                var[j] += c * c;
            }
        }
        let floor = T::lit(1e3) * T::epsilon();
        let mut keep = Vec::with_capacity(p);
        let mut kept_means = Vec::with_capacity(p);
        let mut scales = Vec::with_capacity(p);
        for j in 0..p {
            let std = (var[j] / nf).sqrt();
            if std > floor * max_abs[j] {
                keep.push(j);
                kept_means.push(means[j]);
                scales.push(match scaling {
                    PcrScaling::Standardize => std,
                    PcrScaling::Center => T::one(),
                });
            }
        }
        Self {
            means: kept_means,
            scales,
            keep,
            input_cols: p,
        }
    }

    /// Indices of the retained input columns.
    pub fn kept(&self) -> &[usize] {
        &self.keep
    }

    /// Indices of the zero-variance input columns that were dropped.
    pub fn dropped(&self) -> Vec<usize> {
        (0..self.input_cols)
            .filter(|j| self.keep.binary_search(j).is_err())
            .collect()
    }

    pub fn input_cols(&self) -> usize {
        self.input_cols
    }

    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.cols() != self.input_cols {
            return Err(Error::Argument(format!(
                "inputs have {} columns, scaler expects {}",
                x.cols(),
                self.input_cols
            )));
        }
        let mut out = Matrix::zeros(x.rows(), self.keep.len());
        for i in 0..x.rows() {
            let src = x.row(i);
            let dst = out.row_mut(i);
            for (k, &j) in self.keep.iter().enumerate() {
                dst[k] = (src[j] - self.means[k]) / self.scales[k];
            }
        }
        Ok(out)
    }
}

/// State needed to map a raw feature row into the PCR design `[1, z Vₖᵀ]`.
#[derive(Debug, Clone)]
pub struct PcrState<T> {
    pub scaler: Scaler<T>,
    /// Top right singular vectors of the scaled design as rows (k × p').
    pub components: Matrix<T>,
    pub intercept: T,
}

#[derive(Debug, Clone)]
enum WeightOperator<T> {
    /// `ŝ(x₀) = (z₀ᵀ L) R` for the model features `z₀`.
    Factored { left: Matrix<T>, right: Matrix<T> },
    /// `ŝ(x₀) = b₀ᵀ B⁻¹`.
    Basis { lu: Lu<T> },
}

#[derive(Debug, Clone)]
pub struct LinearFit<T> {
    mode: FitMode,
    coefficients: Vec<T>,
    train_design: Matrix<T>,
    fitted: Vec<T>,
    pcr: Option<PcrState<T>>,
    /// Right singular vectors (n × p) mapping features to SVD-basis coordinates.
    basis_map: Option<Matrix<T>>,
    operator: WeightOperator<T>,
    svd_tolerance: T,
    rank: usize,
    pseudo_inverse: bool,
}

fn check_system<T: Real>(phi: &Matrix<T>, y: &[T]) -> Result<()> {
    if phi.rows() == 0 || phi.cols() == 0 {
        return Err(Error::Argument("empty design matrix".into()));
    }
    if y.len() != phi.rows() {
        return Err(Error::Consistency(format!(
            "design has {} rows but y has {} entries",
            phi.rows(),
            y.len()
        )));
    }
    if !phi.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite entries in the regression inputs".into()));
    }
    Ok(())
}

/// OLS factors `(V Σ⁻¹, Uᵀ)` of a full-column-rank design.
fn ols_operator<T: Real>(design: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>, T)> {
    let p = design.cols();
    let svd = ThinSvd::new(design)?;
    if svd.rank() < p {
        let index = svd.rank();
        return Err(Error::Singular {
            index,
            value: svd.singular_values[index].to_f64_lossy(),
            tolerance: svd.tolerance.to_f64_lossy(),
        });
    }
    let mut left = svd.vt.transpose();
    for i in 0..p {
        let row = left.row_mut(i);
        for (v, &s) in row.iter_mut().zip(&svd.singular_values) {
            *v /= s;
        }
    }
    Ok((left, svd.u.transpose(), svd.tolerance))
}

impl<T: Real> LinearFit<T> {
    #[allow(clippy::too_many_arguments)]
    fn finish(
        mode: FitMode,
        phi: &Matrix<T>,
        y: &[T],
        operator: WeightOperator<T>,
        pcr: Option<PcrState<T>>,
        basis_map: Option<Matrix<T>>,
        svd_tolerance: T,
        rank: usize,
        pseudo_inverse: bool,
    ) -> Result<Self> {
        let coefficients = match &operator {
            WeightOperator::Factored { left, right } => left.matvec(&right.matvec(y)),
            WeightOperator::Basis { lu } => lu.solve(y),
        };
        let mut fit = Self {
            mode,
            coefficients,
            train_design: phi.clone(),
            fitted: Vec::new(),
            pcr,
            basis_map,
            operator,
            svd_tolerance,
            rank,
            pseudo_inverse,
        };
        if let Some(state) = &mut fit.pcr {
            state.intercept = fit.coefficients[0];
        }
        fit.fitted = fit.predict_features(phi)?;
        if fit.fitted.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "{} fit produced non-finite predictions",
                mode.as_str()
            )));
        }
        Ok(fit)
    }

    /// Ordinary least squares, `β̂ = (ΦᵀΦ)⁻¹Φᵀy`, for `p < n` and full column rank.
    pub fn fit_ols(phi: &Matrix<T>, y: &[T]) -> Result<Self> {
        check_system(phi, y)?;
        let (n, p) = phi.shape();
        if p >= n {
            return Err(Error::Argument(format!(
                "OLS needs fewer features than samples, got p={p} n={n}"
            )));
        }
        let (left, right, tol) = ols_operator(phi)?;
        Self::finish(
            FitMode::Ols,
            phi,
            y,
            WeightOperator::Factored { left, right },
            None,
            None,
            tol,
            p,
            false,
        )
    }

    /// Minimum-norm interpolation `β̂ = Φᵀ(ΦΦᵀ)⁺y` for `p ≥ n`, computed from an
    /// eigendecomposition of the Gram matrix. A rank-deficient Gram matrix
    /// falls back to its pseudo-inverse and sets [`LinearFit::is_pseudo_inverse`].
    pub fn fit_minnorm(phi: &Matrix<T>, y: &[T]) -> Result<Self> {
        check_system(phi, y)?;
        let (n, p) = phi.shape();
        if p < n {
            return Err(Error::Argument(format!(
                "minimum-norm fit needs at least as many features as samples, got p={p} n={n}"
            )));
        }
        let eig = SymmetricEigen::new(&phi.gram_rows())?;
        let lambda_max = eig.values[0].max(T::zero());
        let sigma_max = lambda_max.sqrt();
        let size = T::from_usize_lossy(n.max(p));
        // Same cutoff as the Gram route of `ThinSvd`, expressed on eigenvalues.
        let tol = (size * sigma_max * T::epsilon()).max((size * T::epsilon()).sqrt() * sigma_max);
        let rank = eig.values.iter().take_while(|&&l| l > tol * tol).count();
        if rank == 0 {
            return Err(Error::Singular {
                index: 0,
                value: sigma_max.to_f64_lossy(),
                tolerance: tol.to_f64_lossy(),
            });
        }
        let keep: Vec<usize> = (0..rank).collect();
        let right = eig.vectors.select_rows(&keep);
        let mut qt_phi = right.matmul(phi);
        for (j, &l) in eig.values[..rank].iter().enumerate() {
            for v in qt_phi.row_mut(j) {
                *v /= l;
            }
        }
        Self::finish(
            FitMode::MinNorm,
            phi,
            y,
            WeightOperator::Factored {
                left: qt_phi.transpose(),
                right,
            },
            None,
            None,
            tol,
            rank,
            rank < n,
        )
    }

    /// Regression on the compact SVD basis: with `Φ = UΣVᵀ` the training
    /// basis is `B = UΣ`, a new input maps to `b(x) = Vᵀφ(x)`, and `B β = y`
    /// is solved by LU.
    pub fn fit_svd_basis(phi: &Matrix<T>, y: &[T]) -> Result<Self> {
        check_system(phi, y)?;
        let (n, p) = phi.shape();
        if p < n {
            return Err(Error::Argument(format!(
                "SVD-basis fit needs at least as many features as samples, got p={p} n={n}"
            )));
        }
        let svd = ThinSvd::new(phi)?;
        if svd.rank() < n {
            let index = svd.rank();
            return Err(Error::Singular {
                index,
                value: svd.singular_values[index].to_f64_lossy(),
                tolerance: svd.tolerance.to_f64_lossy(),
            });
        }
        let mut b = svd.u.clone();
        for i in 0..n {
            for (v, &s) in b.row_mut(i).iter_mut().zip(&svd.singular_values) {
                *v *= s;
            }
        }
        let lu = Lu::new(&b)?;
        Self::finish(
            FitMode::SvdBasis,
            phi,
            y,
            WeightOperator::Basis { lu },
            None,
            Some(svd.vt),
            svd.tolerance,
            n,
            false,
        )
    }

    /// Principal component regression: scale the columns, project onto the
    /// top `p_pc` right singular vectors, prepend an intercept and solve OLS.
    pub fn fit_pcr(phi: &Matrix<T>, y: &[T], p_pc: usize, scaling: PcrScaling) -> Result<Self> {
        check_system(phi, y)?;
        let (n, p) = phi.shape();
        if p_pc == 0 || p_pc > (n - 1).min(p) {
            return Err(Error::Argument(format!(
                "p_pc = {p_pc} outside 1..={} for n={n}, p={p}",
                (n - 1).min(p)
            )));
        }
        let scaler = Scaler::fit(phi, scaling);
        if p_pc > scaler.kept().len() {
            return Err(Error::Argument(format!(
                "p_pc = {p_pc} exceeds the {} columns left after dropping zero-variance ones",
                scaler.kept().len()
            )));
        }
        let z = scaler.apply(phi)?;
        let svd = ThinSvd::new(&z)?;
        if svd.rank() < p_pc {
            let index = svd.rank();
            return Err(Error::Singular {
                index,
                value: svd.singular_values[index].to_f64_lossy(),
                tolerance: svd.tolerance.to_f64_lossy(),
            });
        }
        let keep: Vec<usize> = (0..p_pc).collect();
        let components = svd.vt.select_rows(&keep);
        let design = z.matmul_t(&components).with_intercept();
        let (left, right, tol) = ols_operator(&design)?;
        Self::finish(
            FitMode::Pcr,
            phi,
            y,
            WeightOperator::Factored { left, right },
            Some(PcrState {
                scaler,
                components,
                intercept: T::zero(),
            }),
            None,
            tol,
            p_pc + 1,
            false,
        )
    }

    pub fn mode(&self) -> FitMode {
        self.mode
    }

    /// Coefficients in the model's own coordinates: raw features for OLS and
    /// min-norm, SVD-basis coordinates, or `[intercept, PC scores]` for PCR.
    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn train_design(&self) -> &Matrix<T> {
        &self.train_design
    }

    pub fn fitted_values(&self) -> &[T] {
        &self.fitted
    }

    pub fn pcr_state(&self) -> Option<&PcrState<T>> {
        self.pcr.as_ref()
    }

    pub fn svd_tolerance(&self) -> T {
        self.svd_tolerance
    }

    /// Rank of the solved system.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// True when a minimum-norm fit had to fall back to the pseudo-inverse.
    pub fn is_pseudo_inverse(&self) -> bool {
        self.pseudo_inverse
    }

    pub fn n_train(&self) -> usize {
        self.train_design.rows()
    }

    /// Maps raw feature rows to the coordinates the coefficients act on.
    fn model_features(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.cols() != self.train_design.cols() {
            return Err(Error::Argument(format!(
                "inputs have {} features, fit expects {}",
                x.cols(),
                self.train_design.cols()
            )));
        }
        Ok(match (&self.pcr, &self.basis_map) {
            (Some(state), _) => state
                .scaler
                .apply(x)?
                .matmul_t(&state.components)
                .with_intercept(),
            (None, Some(vt)) => x.matmul_t(vt),
            (None, None) => x.clone(),
        })
    }

    pub fn predict_features(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        Ok(self.model_features(x)?.matvec(&self.coefficients))
    }

    /// Smoother weights for each row of `x` (`m × n`).
    pub fn weights_batch(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let z = self.model_features(x)?;
        Ok(match &self.operator {
            WeightOperator::Factored { left, right } => z.matmul(left).matmul(right),
            WeightOperator::Basis { lu } => {
                let n = self.n_train();
                let mut out = Matrix::zeros(z.rows(), n);
                for (i, b0) in z.row_iter().enumerate() {
                    out.row_mut(i).copy_from_slice(&lu.solve_transpose(b0));
                }
                out
            }
        })
    }

    pub fn weights_linear(&self, x0: &[T]) -> Result<SmootherWeights<T>> {
        let w = self.weights_batch(&Matrix::from_vec(1, x0.len(), x0.to_vec()))?;
        Ok(SmootherWeights::new(w.into_vec()))
    }

    /// Training smoother matrix `Ŝ`, row `i` = `ŝ(x_i)`.
    pub fn hat_matrix(&self) -> Matrix<T> {
        self.weights_batch(&self.train_design)
            .expect("training design has the fitted width")
    }
}

impl<T: Real> Smoother<T> for LinearFit<T> {
    fn n_train(&self) -> usize {
        self.train_design.rows()
    }

    fn predict(&self, inputs: &Matrix<T>) -> Result<Vec<T>> {
        self.predict_features(inputs)
    }

    fn weight_matrix(&self, inputs: &Matrix<T>) -> Result<Matrix<T>> {
        self.weights_batch(inputs)
    }

    fn label(&self) -> String {
        format!("{}(p={})", self.mode.as_str(), self.train_design.cols())
    }
}

/// Principal component basis of a scaled design, shared by every PCR fit
/// with `k ≤ rank` components on the same features.
///
/// With `Z = UΣVᵀ` and centered columns the PCR hat matrix is
/// `11ᵀ/n + U_k U_kᵀ`, and an input with normalized scores
/// `a = z Vᵀ Σ⁻¹` has weights `1ᵀ/n + a_k U_kᵀ`.
#[derive(Debug, Clone)]
pub struct PcrBasis<T> {
    scaler: Scaler<T>,
    u: Matrix<T>,
    sigma: Vec<T>,
    vt: Matrix<T>,
    /// `U_rᵀ 1`, zero up to rounding for centered designs.
    u_sums: Vec<T>,
}

impl<T: Real> PcrBasis<T> {
    pub fn new(phi: &Matrix<T>, scaling: PcrScaling) -> Result<Self> {
        if phi.rows() < 2 {
            return Err(Error::Argument("PCR needs at least two samples".into()));
        }
        let scaler = Scaler::fit(phi, scaling);
        if scaler.kept().is_empty() {
            return Err(Error::Argument("every feature column is constant".into()));
        }
        let z = scaler.apply(phi)?;
        let svd = ThinSvd::with_options(&z, SvdOptions::default())?;
        let r = svd.rank();
        let sigma = svd.singular_values[..r].to_vec();
        let u_sums = (0..r)
            .map(|j| (0..z.rows()).map(|i| svd.u[(i, j)]).sum())
            .collect();
        Ok(Self {
            scaler,
            u: svd.u,
            sigma,
            vt: svd.vt,
            u_sums,
        })
    }

    pub fn n_train(&self) -> usize {
        self.u.rows()
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Largest admissible component count: `min(n − 1, rank)`.
    pub fn max_components(&self) -> usize {
        self.rank().min(self.n_train() - 1)
    }

    pub fn singular_values(&self) -> &[T] {
        &self.sigma
    }

    pub fn scaler(&self) -> &Scaler<T> {
        &self.scaler
    }

    /// Normalized scores `z Vᵀ Σ⁻¹` of new raw feature rows (m × rank).
    pub fn scores(&self, phi: &Matrix<T>) -> Result<Matrix<T>> {
        let mut a = self.scaler.apply(phi)?.matmul_t(&self.vt);
        for i in 0..a.rows() {
            for (v, &s) in a.row_mut(i).iter_mut().zip(&self.sigma) {
                *v /= s;
            }
        }
        Ok(a)
    }

    /// Normalized scores of the training rows, which are `U` itself.
    pub fn train_scores(&self) -> &Matrix<T> {
        &self.u
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.max_components() {
            return Err(Error::Argument(format!(
                "k = {k} outside 1..={}",
                self.max_components()
            )));
        }
        Ok(())
    }

    /// `U_rᵀ Y` for a target matrix with one column per task (rank × C).
    pub fn project_targets(&self, y: &Matrix<T>) -> Matrix<T> {
        self.u.t_matmul(y)
    }

    /// Predictions `1ᵀY/n + a_k (U_kᵀ Y)` for each task column (m × C).
    pub fn predict(
        &self,
        scores: &Matrix<T>,
        k: usize,
        projected: &Matrix<T>,
        target_means: &[T],
    ) -> Result<Matrix<T>> {
        self.check_k(k)?;
        let c = projected.cols();
        let mut out = Matrix::zeros(scores.rows(), c);
        for i in 0..scores.rows() {
            let a = &scores.row(i)[..k];
            let dst = out.row_mut(i);
            dst.copy_from_slice(target_means);
            for (j, &aj) in a.iter().enumerate() {
                for (o, &pj) in dst.iter_mut().zip(projected.row(j)) {
                    *o += aj * pj;
                }
            }
        }
        Ok(out)
    }

    /// Dense weight rows `1ᵀ/n + a_k U_kᵀ` (m × n).
    pub fn weights(&self, scores: &Matrix<T>, k: usize) -> Result<Matrix<T>> {
        self.check_k(k)?;
        let n = self.n_train();
        let keep: Vec<usize> = (0..k).collect();
        let mut w = scores.select_columns(&keep).matmul_t(&self.u.select_columns(&keep));
        let inv_n = T::one() / T::from_usize_lossy(n);
        for v in w.as_mut_slice() {
            *v += inv_n;
        }
        Ok(w)
    }

    /// `‖ŝ(x₀)‖²` per row without forming the weights, using `U_kᵀU_k = I`.
    pub fn weight_norms_sq(&self, scores: &Matrix<T>, k: usize) -> Result<Vec<T>> {
        self.check_k(k)?;
        let inv_n = T::one() / T::from_usize_lossy(self.n_train());
        let two = T::lit(2.0);
        Ok(scores
            .row_iter()
            .map(|row| {
                let a = &row[..k];
                let cross: T = a.iter().zip(&self.u_sums).map(|(&x, &c)| x * c).sum();
                let sq: T = a.iter().map(|&x| x * x).sum();
                inv_n + two * inv_n * cross + sq
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    fn gaussian_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn ols_single_column() {
        let phi = Matrix::<f64>::from_vec(2, 1, vec![1.0, 2.0]);
        let fit = LinearFit::fit_ols(&phi, &[1.0, 2.0]).unwrap();
        assert!((fit.coefficients()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ols_matches_normal_equations() {
        let x = [1.0, 2.0, 4.0];
        let y = [2.0, 3.0, 9.0];
        let fit = LinearFit::fit_ols(&Matrix::from_vec(3, 1, x.to_vec()), &y).unwrap();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        assert!((fit.coefficients()[0] - sxy / sxx).abs() < 1e-12);
    }

    #[test]
    fn ols_residual_orthogonal_and_no_worse_than_sub_models() {
        for (n, seed) in [(4usize, 1u64), (5, 2), (6, 3)] {
            let p = n - 1;
            let phi = gaussian(n, p, seed);
            let y = gaussian_vec(n, seed + 100);
            let fit = LinearFit::fit_ols(&phi, &y).unwrap();
            let r: Vec<f64> = y.iter().zip(fit.fitted_values()).map(|(a, b)| a - b).collect();
            let ortho = phi.t_matvec(&r);
            assert!(ortho.iter().all(|v| v.abs() <= 1e-6 * norm(&y)));
            let full = norm(&r);
            for mask in 1u32..(1 << p) - 1 {
                let cols: Vec<usize> = (0..p).filter(|j| mask & (1 << j) != 0).collect();
                let sub = LinearFit::fit_ols(&phi.select_columns(&cols), &y).unwrap();
                let rs: Vec<f64> = y.iter().zip(sub.fitted_values()).map(|(a, b)| a - b).collect();
                assert!(full <= norm(&rs) + 1e-12);
            }
        }
    }

    #[test]
    fn ols_rank_deficiency_names_singular_value() {
        let phi = Matrix::from_vec(4, 2, vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 4.0, 8.0]);
        match LinearFit::fit_ols(&phi, &[1.0, 2.0, 3.0, 4.0]) {
            Err(Error::Singular { index, value, .. }) => {
                assert_eq!(index, 1);
                assert!(value < 1e-10);
            }
            other => panic!("expected singular error, got {other:?}"),
        }
        assert!(matches!(
            LinearFit::fit_ols(&Matrix::<f64>::zeros(2, 2), &[1.0, 2.0]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn minnorm_pads_dead_columns_with_zeros() {
        let n = 4;
        let phi = Matrix::<f64>::from_fn(n, 7, |i, j| if i == j { 1.0 } else { 0.0 });
        let y = [1.0, -2.0, 3.0, 0.5];
        let fit = LinearFit::fit_minnorm(&phi, &y).unwrap();
        for (j, &b) in fit.coefficients().iter().enumerate() {
            let expect = if j < n { y[j] } else { 0.0 };
            assert!((b - expect).abs() < 1e-12);
        }
        assert!(!fit.is_pseudo_inverse());
    }

    #[test]
    fn minnorm_interpolates_with_minimum_norm() {
        let (n, p) = (10, 30);
        let phi = gaussian(n, p, 4);
        let y = gaussian_vec(n, 5);
        let fit = LinearFit::fit_minnorm(&phi, &y).unwrap();
        let res: Vec<f64> = fit.fitted_values().iter().zip(&y).map(|(a, b)| a - b).collect();
        assert!(norm(&res) / norm(&y) <= 1e-6);
        // Null-space sampler: project random directions off the row space.
        let rowspace = ThinSvd::new(&phi).unwrap();
        let beta = fit.coefficients();
        let base = norm(beta);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let mut d: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
            let c = rowspace.vt.matvec(&d);
            let proj = rowspace.vt.t_matvec(&c);
            for (di, pi) in d.iter_mut().zip(&proj) {
                *di -= pi;
            }
            let perturbed: Vec<f64> = beta.iter().zip(&d).map(|(b, e)| b + e).collect();
            assert!(norm(&perturbed) > base);
        }
    }

    #[test]
    fn minnorm_rank_deficient_falls_back_to_pseudo_inverse() {
        let mut phi = gaussian(5, 8, 7);
        let first = phi.row(0).to_vec();
        phi.row_mut(1).copy_from_slice(&first);
        let fit = LinearFit::fit_minnorm(&phi, &[1.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(fit.is_pseudo_inverse());
        assert_eq!(fit.rank(), 4);
    }

    #[test]
    fn svd_basis_matches_minnorm_on_new_points() {
        let (n, p) = (20, 60);
        let phi = gaussian(n, p, 8);
        let y = gaussian_vec(n, 9);
        let mn = LinearFit::fit_minnorm(&phi, &y).unwrap();
        let sb = LinearFit::fit_svd_basis(&phi, &y).unwrap();
        let test = gaussian(50, p, 10);
        let a = mn.predict_features(&test).unwrap();
        let b = sb.predict_features(&test).unwrap();
        for (x, z) in a.iter().zip(&b) {
            assert!((x - z).abs() <= 1e-6 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn square_system_is_the_exact_solve() {
        let phi = gaussian(6, 6, 11);
        let y = gaussian_vec(6, 12);
        let mn = LinearFit::fit_minnorm(&phi, &y).unwrap();
        let sb = LinearFit::fit_svd_basis(&phi, &y).unwrap();
        let exact = Lu::new(&phi).unwrap().solve(&y);
        for (a, b) in mn.coefficients().iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in sb.fitted_values().iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn svd_basis_two_by_three_coefficients() {
        // Φ = [[1,0,0],[0,2,0]]: σ = (2, 1), B = UΣ is a signed permutation
        // of diag(2, 1), so |β| = (4/2, 3/1) for y = (3, 4).
        let phi = Matrix::<f64>::from_vec(2, 3, vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0]);
        let y = [3.0, 4.0];
        let fit = LinearFit::fit_svd_basis(&phi, &y).unwrap();
        let c = fit.coefficients();
        assert!((c[0].abs() - 2.0).abs() < 1e-14);
        assert!((c[1].abs() - 3.0).abs() < 1e-14);
        let mn = LinearFit::fit_minnorm(&phi, &y).unwrap();
        for (a, b) in mn.coefficients().iter().zip([3.0, 2.0, 0.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pcr_full_rank_matches_minnorm_training_predictions() {
        let (n, p) = (15, 40);
        let phi = gaussian(n, p, 13);
        let y = gaussian_vec(n, 14);
        let pcr = LinearFit::fit_pcr(&phi, &y, n - 1, PcrScaling::Standardize).unwrap();
        let mn = LinearFit::fit_minnorm(&phi, &y).unwrap();
        for (a, b) in pcr.fitted_values().iter().zip(mn.fitted_values()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn pcr_one_component_ignores_orthogonal_directions() {
        // Three noisy copies of one latent direction.
        let n = 40;
        let t = gaussian_vec(n, 15);
        let noise = gaussian(n, 3, 16);
        let phi = Matrix::from_fn(n, 3, |i, j| (j as f64 + 1.0) * t[i] + 0.01 * noise[(i, j)]);
        let fit = LinearFit::fit_pcr(&phi, &t, 1, PcrScaling::Standardize).unwrap();
        let state = fit.pcr_state().unwrap();
        let v = state.components.row(0).to_vec();
        // Moving along a direction orthogonal to the component (in scaled
        // coordinates) must not change the prediction.
        let w = [v[1], -v[0], 0.0];
        let x0 = phi.row(3).to_vec();
        let mut x1 = x0.clone();
        let stds: Vec<f64> = (0..3)
            .map(|j| {
                let col = phi.column(j);
                let m = col.iter().sum::<f64>() / n as f64;
                (col.iter().map(|c| (c - m) * (c - m)).sum::<f64>() / n as f64).sqrt()
            })
            .collect();
        for j in 0..3 {
            x1[j] += 0.7 * w[j] * stds[j];
        }
        let pred = fit
            .predict_features(&Matrix::from_rows(&[x0, x1]))
            .unwrap();
        assert!((pred[0] - pred[1]).abs() < 1e-10);
        assert!(v.iter().all(|c| (c.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-3));
    }

    #[test]
    fn pcr_constant_target() {
        let phi = gaussian(12, 5, 17);
        let fit = LinearFit::fit_pcr(&phi, &[2.5; 12], 3, PcrScaling::Standardize).unwrap();
        assert!((fit.pcr_state().unwrap().intercept - 2.5).abs() < 1e-12);
        assert!(fit.coefficients()[1..].iter().all(|c| c.abs() < 1e-12));
        assert!(matches!(
            LinearFit::fit_pcr(&phi, &[2.5; 12], 6, PcrScaling::Standardize),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            LinearFit::fit_pcr(&phi, &[2.5; 12], 0, PcrScaling::Center),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn pcr_drops_constant_columns() {
        let mut phi = gaussian(10, 4, 18);
        for i in 0..10 {
            phi[(i, 2)] = 3.0;
        }
        let fit = LinearFit::fit_pcr(&phi, &gaussian_vec(10, 19), 2, PcrScaling::Standardize)
            .unwrap();
        assert_eq!(fit.pcr_state().unwrap().scaler.dropped(), vec![2]);
    }

    #[test]
    fn minnorm_weights_at_training_points_are_unit_vectors() {
        let phi = gaussian(8, 20, 20);
        let fit = LinearFit::fit_minnorm(&phi, &gaussian_vec(8, 21)).unwrap();
        let w = fit.weights_linear(phi.row(3)).unwrap();
        for (i, &v) in w.weights.iter().enumerate() {
            let e = if i == 3 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-6);
        }
        let hat = fit.hat_matrix();
        assert!(hat.sub(&Matrix::identity(8)).max_abs() < 1e-6);
    }

    #[test]
    fn intercept_only_ols_is_the_sample_mean() {
        let n = 9;
        let fit = LinearFit::fit_ols(&Matrix::from_vec(n, 1, vec![1.0; n]), &gaussian_vec(n, 22))
            .unwrap();
        let w = fit.weights_linear(&[1.0]).unwrap();
        assert!(w.weights.iter().all(|&v| (v - 1.0 / n as f64).abs() < 1e-15));
    }

    #[test]
    fn weights_reproduce_predictions_for_every_mode() {
        let y = gaussian_vec(12, 23);
        let test = gaussian(7, 30, 24);
        let tall = gaussian(12, 4, 25);
        let wide = gaussian(12, 30, 26);
        let fits = [
            (LinearFit::fit_ols(&tall, &y).unwrap(), test.leading_columns(4)),
            (LinearFit::fit_minnorm(&wide, &y).unwrap(), test.clone()),
            (LinearFit::fit_svd_basis(&wide, &y).unwrap(), test.clone()),
            (
                LinearFit::fit_pcr(&wide, &y, 6, PcrScaling::Standardize).unwrap(),
                test.clone(),
            ),
            (
                LinearFit::fit_pcr(&wide, &y, 6, PcrScaling::Center).unwrap(),
                test.clone(),
            ),
        ];
        for (fit, x) in &fits {
            let pred = fit.predict_features(x).unwrap();
            let w = fit.weights_batch(x).unwrap();
            let via = w.matvec(&y);
            for (a, b) in pred.iter().zip(&via) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{:?}", fit.mode());
            }
        }
    }

    #[test]
    fn ols_hat_matrix_traces_and_idempotence() {
        let phi = gaussian(30, 3, 27);
        let fit = LinearFit::fit_ols(&phi, &gaussian_vec(30, 28)).unwrap();
        let s = fit.hat_matrix();
        assert!((s.trace() - 3.0).abs() < 1e-8);
        assert!(s.matmul(&s).sub(&s).max_abs() < 1e-8);
    }

    #[test]
    fn pcr_basis_agrees_with_fit_pcr() {
        let (n, p) = (25, 18);
        let phi = gaussian(n, p, 29);
        let y = gaussian_vec(n, 30);
        let test = gaussian(6, p, 31);
        let basis = PcrBasis::new(&phi, PcrScaling::Standardize).unwrap();
        let scores = basis.scores(&test).unwrap();
        let ym = Matrix::from_vec(n, 1, y.clone());
        let proj = basis.project_targets(&ym);
        let mean = y.iter().sum::<f64>() / n as f64;
        for k in [1, 5, 18] {
            let fit = LinearFit::fit_pcr(&phi, &y, k, PcrScaling::Standardize).unwrap();
            let direct = fit.predict_features(&test).unwrap();
            let fast = basis.predict(&scores, k, &proj, &[mean]).unwrap();
            let wd = fit.weights_batch(&test).unwrap();
            let wf = basis.weights(&scores, k).unwrap();
            let norms = basis.weight_norms_sq(&scores, k).unwrap();
            for i in 0..6 {
                assert!((direct[i] - fast[(i, 0)]).abs() < 1e-9);
                let nd: f64 = wd.row(i).iter().map(|v| v * v).sum();
                assert!((nd - norms[i]).abs() < 1e-9 * (1.0 + nd));
            }
            assert!(wd.sub(&wf).max_abs() < 1e-9);
            let train_w = basis.weights(basis.train_scores(), k).unwrap();
            assert!((train_w.trace() - (k as f64 + 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn f32_fits_work() {
        let phi = gaussian(10, 3, 32).cast::<f32>();
        let y: Vec<f32> = gaussian_vec(10, 33).iter().map(|&v| v as f32).collect();
        let fit = LinearFit::fit_ols(&phi, &y).unwrap();
        let s = fit.hat_matrix();
        assert!((s.trace() - 3.0).abs() < 1e-4);
    }
}
