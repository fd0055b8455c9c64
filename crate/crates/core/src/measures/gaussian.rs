use nalgebra::{DMatrix, DVector};

use crate::{Error, ExtReal, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;

/// A Gaussian measure `N(mean, cov)` on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianMeasure {
    /// The covariance must be symmetric within 1e-12 (relative to its largest
    /// entry) with eigenvalues at least −1e-10.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::Domain(format!(
                "mean of length {n} with {}x{} covariance",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite Gaussian parameters".into()));
        }
        let scale = cov.amax().max(1.0);
        if (&cov - cov.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::InvalidDistribution("covariance is not symmetric".into()));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        if n > 0 {
            let min_eig = cov.clone().symmetric_eigenvalues().min();
            if min_eig < -EIGEN_TOL * scale {
                return Err(Error::InvalidDistribution(format!(
                    "covariance has eigenvalue {min_eig:e}"
                )));
            }
        }
        Ok(GaussianMeasure { mean, cov })
    }

    pub fn from_slices(mean: &[f64], cov_row_major: &[f64]) -> Result<Self> {
        let n = mean.len();
        if cov_row_major.len() != n * n {
            return Err(Error::Domain(format!(
                "{} covariance entries for dimension {n}",
                cov_row_major.len()
            )));
        }
        Self::new(
            DVector::from_column_slice(mean),
            DMatrix::from_row_slice(n, n, cov_row_major),
        )
    }

    /// `N(0, I_n)`.
    pub fn standard(n: usize) -> Self {
        GaussianMeasure {
            mean: DVector::zeros(n),
            cov: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// The law of the coordinates listed in `indices`.
    pub fn marginal(&self, indices: &[usize]) -> Result<Self> {
        if let Some(i) = indices.iter().find(|i| **i >= self.dim()) {
            return Err(Error::Domain(format!("coordinate {i} out of range")));
        }
        let k = indices.len();
        let mean = DVector::from_fn(k, |i, _| self.mean[indices[i]]);
        let cov = DMatrix::from_fn(k, k, |i, j| self.cov[(indices[i], indices[j])]);
        Ok(GaussianMeasure { mean, cov })
    }
}

/// `R(θ₁ ‖ θ₂) = ½[tr(Σ₂⁻¹Σ₁) + Δᵀ Σ₂⁻¹ Δ − n − log det(Σ₂⁻¹Σ₁)]`.
///
/// `Σ₂` must be positive definite. A singular `Σ₁` makes `θ₁` singular with
/// respect to `θ₂`, so the result is `+∞`.
pub fn gaussian_relative_entropy(
    theta1: &GaussianMeasure,
    theta2: &GaussianMeasure,
) -> Result<ExtReal> {
    let n = theta1.dim();
    if theta2.dim() != n {
        return Err(Error::Domain(format!(
            "Gaussians of dimension {n} and {}",
            theta2.dim()
        )));
    }
    let l2 = theta2
        .cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Domain("reference covariance is not positive definite".into()))?;
    let l2 = l2.l();
    let Some(l1) = theta1.cov.clone().cholesky() else {
        return Ok(ExtReal::Infinite);
    };
    let l1 = l1.l();
    let logdet1: f64 = l1.diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
    if !logdet1.is_finite() {
        return Ok(ExtReal::Infinite);
    }
    let logdet2: f64 = l2.diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;

    let m = l2
        .solve_lower_triangular(&l1)
        .ok_or_else(|| Error::Domain("reference covariance is singular".into()))?;
    let trace = m.norm_squared();
    let delta = &theta2.mean - &theta1.mean;
    let z = l2
        .solve_lower_triangular(&delta)
        .ok_or_else(|| Error::Domain("reference covariance is singular".into()))?;
    let quad = z.norm_squared();
    let value = 0.5 * (trace + quad - n as f64 - (logdet1 - logdet2));
    Ok(ExtReal::Finite(value.max(0.0)))
}
