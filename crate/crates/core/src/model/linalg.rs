use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use super::{check_symmetric, checked_cholesky, symmetrize, PopulationModel};
use crate::distributions::sample_standard_normal;
use crate::error::{invalid, Error, Result};

/// Relative size below which a negative eigenvalue is treated as rounding.
const EIGEN_CLAMP: f64 = 1e-10;

/// `Δ² = (μ₁−μ₂)ᵀΣ⁻¹(μ₁−μ₂)`.
pub fn mahalanobis_delta_sq(model: &PopulationModel) -> f64 {
    model.delta_sq()
}

/// `R_l = Σ⁻¹ − Σ⁻¹llᵀΣ⁻¹ / lᵀΣ⁻¹l`.
pub fn projection_residual_matrix(sigma_inv: &DMatrix<f64>, l: &DVector<f64>) -> Result<DMatrix<f64>> {
    if sigma_inv.nrows() != l.len() || sigma_inv.ncols() != l.len() {
        return Err(Error::DimensionMismatch {
            expected: sigma_inv.nrows(),
            found: l.len(),
        });
    }
    let v = sigma_inv * l;
    let q = l.dot(&v);
    if !(q > 0.0) {
        return Err(invalid("l", "lᵀΣ⁻¹l must be positive (l = 0?)"));
    }
    let mut r = sigma_inv - (&v * v.transpose()) / q;
    symmetrize(&mut r);
    Ok(r)
}

/// Symmetric square root of a positive semi-definite matrix.
///
/// Eigenvalues down to `−1e-10·‖m‖_F` are taken as zero; anything more
/// negative is reported.
pub fn spd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    let scale = m.norm();
    let eig = SymmetricEigen::new(m.clone());
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < -EIGEN_CLAMP * scale {
            return Err(Error::NegativeEigenvalue(*v));
        }
        *v = v.max(0.0).sqrt();
    }
    let q = &eig.eigenvectors;
    let mut out = q * DMatrix::from_diagonal(&roots) * q.transpose();
    symmetrize(&mut out);
    Ok(out)
}

/// Draws from `N_p(mean, cov)` as `mean + L·z`, with the Cholesky factor
/// computed once.
#[derive(Debug, Clone)]
pub struct MvnSampler {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
}

impl MvnSampler {
    pub fn new(mean: DVector<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: cov.nrows(),
            });
        }
        check_symmetric(cov)?;
        let factor = checked_cholesky(cov.clone(), "covariance")?.unpack();
        Ok(Self { mean, factor })
    }

    /// Sampler that reuses an existing lower-triangular factor.
    pub fn from_factor(mean: DVector<f64>, factor: DMatrix<f64>) -> Self {
        Self { mean, factor }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| sample_standard_normal(rng));
        &self.mean + &self.factor * z
    }

    /// `n` draws as the columns of a `p × n` matrix.
    pub fn sample_matrix<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> DMatrix<f64> {
        let p = self.dim();
        let z = DMatrix::from_fn(p, n, |_, _| sample_standard_normal(rng));
        let mut x = &self.factor * z;
        for mut col in x.column_iter_mut() {
            col += &self.mean;
        }
        x
    }
}

/// One draw from `N_p(mean, cov)`.
pub fn sample_mvn<R: Rng + ?Sized>(rng: &mut R, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(MvnSampler::new(mean.clone(), cov)?.sample(rng))
}
