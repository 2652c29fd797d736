//! Two-group Gaussian model: dimensions, population parameters, observed
//! samples and the pooled estimators built from them.

mod linalg;

pub use linalg::{mahalanobis_delta_sq, projection_residual_matrix, sample_mvn, spd_sqrt, MvnSampler};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::distributions::Dof;
use crate::error::{invalid, Error, Result};

/// Smallest accepted reciprocal condition estimate of a covariance factor.
pub const RCOND_FLOOR: f64 = 1e-12;

/// Relative asymmetry tolerated in a matrix that should be symmetric.
const SYMMETRY_TOL: f64 = 1e-10;

/// Which of the two populations an observation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    First,
    Second,
}

impl Group {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Group::First),
            2 => Ok(Group::Second),
            _ => Err(invalid("group", format!("group label must be 1 or 2, got {i}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Group::First => 1,
            Group::Second => 2,
        }
    }

    /// `(−1)^{i−1}`.
    pub fn sign(self) -> f64 {
        match self {
            Group::First => 1.0,
            Group::Second => -1.0,
        }
    }
}

/// Dimension and group sizes of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemDims {
    p: usize,
    n1: usize,
    n2: usize,
}

impl ProblemDims {
    /// Requires `p ≥ 1`, `n₁, n₂ ≥ 2` and `p < n₁ + n₂ − 2`.
    pub fn new(p: usize, n1: usize, n2: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDims("p must be at least 1".into()));
        }
        if n1 < 2 || n2 < 2 {
            return Err(Error::InvalidDims(format!(
                "each group needs at least 2 observations (n1 = {n1}, n2 = {n2})"
            )));
        }
        if p + 2 >= n1 + n2 {
            return Err(Error::InvalidDims(format!(
                "need p < n1 + n2 - 2, got p = {p}, n1 + n2 = {}",
                n1 + n2
            )));
        }
        Ok(Self { p, n1, n2 })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n(&self, group: Group) -> usize {
        match group {
            Group::First => self.n1,
            Group::Second => self.n2,
        }
    }

    pub fn n_total(&self) -> usize {
        self.n1 + self.n2
    }

    /// `λ = 1/n₁ + 1/n₂`.
    pub fn lambda(&self) -> f64 {
        1.0 / self.n1 as f64 + 1.0 / self.n2 as f64
    }

    /// Concentration ratio `c = p/(n₁+n₂)`.
    pub fn c(&self) -> f64 {
        self.p as f64 / self.n_total() as f64
    }

    /// `b_i = λ·n_i`.
    pub fn b(&self, group: Group) -> f64 {
        self.lambda() * self.n(group) as f64
    }

    /// `n₁ + n₂ − 2`, the divisor of the pooled covariance.
    pub fn pooled_dof(&self) -> f64 {
        (self.n_total() - 2) as f64
    }

    /// `n₁ + n₂ − p − 1`.
    pub fn xi_dof(&self) -> Dof {
        Dof::new((self.n_total() - self.p - 1) as u64).expect("p < n1 + n2 - 2")
    }

    /// `n₁ + n₂ − p`.
    pub fn w_dof(&self) -> Dof {
        Dof::new((self.n_total() - self.p) as u64).expect("p < n1 + n2 - 2")
    }

    /// `p − 1`, absent when `p = 1`.
    pub fn residual_dof(&self) -> Option<Dof> {
        Dof::new(self.p as u64 - 1).ok()
    }
}

/// Population means and the common covariance of the two groups.
#[derive(Debug, Clone)]
pub struct PopulationModel {
    mu1: DVector<f64>,
    mu2: DVector<f64>,
    sigma: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl PopulationModel {
    pub fn new(mu1: DVector<f64>, mu2: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let p = mu1.len();
        if p == 0 {
            return Err(Error::InvalidDims("empty mean vector".into()));
        }
        if mu2.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: mu2.len(),
            });
        }
        if sigma.nrows() != p || sigma.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: sigma.nrows().max(sigma.ncols()),
            });
        }
        if !mu1.iter().chain(mu2.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("population mean"));
        }
        check_symmetric(&sigma)?;
        let chol = checked_cholesky(sigma.clone(), "sigma")?;
        Ok(Self { mu1, mu2, sigma, chol })
    }

    pub fn p(&self) -> usize {
        self.mu1.len()
    }

    pub fn mu1(&self) -> &DVector<f64> {
        &self.mu1
    }

    pub fn mu2(&self) -> &DVector<f64> {
        &self.mu2
    }

    pub fn mean(&self, group: Group) -> &DVector<f64> {
        match group {
            Group::First => &self.mu1,
            Group::Second => &self.mu2,
        }
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Lower Cholesky factor of Σ.
    pub fn sigma_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `μ₁ − μ₂`.
    pub fn mean_diff(&self) -> DVector<f64> {
        &self.mu1 - &self.mu2
    }

    /// `Σ⁻¹v` through the Cholesky factor.
    pub fn sigma_solve(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(v)
    }

    pub fn sigma_inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    /// `Δ² = (μ₁−μ₂)ᵀΣ⁻¹(μ₁−μ₂)`.
    pub fn delta_sq(&self) -> f64 {
        let d = self.mean_diff();
        d.dot(&self.sigma_solve(&d)).max(0.0)
    }
}

/// A `p × n` matrix whose columns are the observations of one group.
#[derive(Debug, Clone)]
pub struct GroupSample {
    observations: DMatrix<f64>,
    group: Group,
}

impl GroupSample {
    pub fn new(observations: DMatrix<f64>, group: Group) -> Result<Self> {
        if observations.ncols() < 2 {
            return Err(Error::InvalidDims(format!(
                "group {} has {} observations, need at least 2",
                group.index(),
                observations.ncols()
            )));
        }
        if observations.nrows() == 0 {
            return Err(Error::InvalidDims("observations have no variables".into()));
        }
        if !observations.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("observation matrix"));
        }
        Ok(Self { observations, group })
    }

    pub fn observations(&self) -> &DMatrix<f64> {
        &self.observations
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn p(&self) -> usize {
        self.observations.nrows()
    }

    pub fn n(&self) -> usize {
        self.observations.ncols()
    }

    pub fn mean(&self) -> DVector<f64> {
        self.observations.column_mean()
    }

    /// Sum of squares and cross products about the group mean,
    /// i.e. `(n − 1)·S`.
    pub fn scatter(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let mut centered = self.observations.clone();
        for mut col in centered.column_iter_mut() {
            col -= &mean;
        }
        let mut s = &centered * centered.transpose();
        symmetrize(&mut s);
        s
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        self.scatter() / (self.n() - 1) as f64
    }
}

/// Group means and the pooled covariance, with the Cholesky factor of the
/// latter kept for solves.
#[derive(Debug, Clone)]
pub struct PooledEstimates {
    xbar1: DVector<f64>,
    xbar2: DVector<f64>,
    s_pl: DMatrix<f64>,
    dims: ProblemDims,
    chol: Cholesky<f64, Dyn>,
}

impl PooledEstimates {
    /// Builds the estimates directly from summary statistics.
    pub fn from_parts(xbar1: DVector<f64>, xbar2: DVector<f64>, s_pl: DMatrix<f64>, dims: ProblemDims) -> Result<Self> {
        let p = dims.p();
        for len in [xbar1.len(), xbar2.len(), s_pl.nrows(), s_pl.ncols()] {
            if len != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: len,
                });
            }
        }
        check_symmetric(&s_pl)?;
        let chol = checked_cholesky(s_pl.clone(), "pooled covariance")?;
        Ok(Self {
            xbar1,
            xbar2,
            s_pl,
            dims,
            chol,
        })
    }

    pub fn xbar1(&self) -> &DVector<f64> {
        &self.xbar1
    }

    pub fn xbar2(&self) -> &DVector<f64> {
        &self.xbar2
    }

    pub fn s_pl(&self) -> &DMatrix<f64> {
        &self.s_pl
    }

    pub fn dims(&self) -> ProblemDims {
        self.dims
    }

    /// `x̄⁽¹⁾ − x̄⁽²⁾`.
    pub fn mean_diff(&self) -> DVector<f64> {
        &self.xbar1 - &self.xbar2
    }

    /// `S_pl⁻¹v` through the Cholesky factor.
    pub fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(v)
    }
}

/// Coefficients of a linear discriminant function.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefVector(DVector<f64>);

impl CoefVector {
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("coefficient vector"));
        }
        Ok(Self(values))
    }

    /// Population coefficients `a = Σ⁻¹(μ₁ − μ₂)`.
    pub fn population(model: &PopulationModel) -> Self {
        Self(model.sigma_solve(&model.mean_diff()))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

/// Pools two group samples into `(x̄⁽¹⁾, x̄⁽²⁾, S_pl)`.
pub fn pooled_estimates(x1: &GroupSample, x2: &GroupSample) -> Result<PooledEstimates> {
    if x1.p() != x2.p() {
        return Err(Error::DimensionMismatch {
            expected: x1.p(),
            found: x2.p(),
        });
    }
    let dims = ProblemDims::new(x1.p(), x1.n(), x2.n())?;
    let mut s_pl = (x1.scatter() + x2.scatter()) / dims.pooled_dof();
    symmetrize(&mut s_pl);
    PooledEstimates::from_parts(x1.mean(), x2.mean(), s_pl, dims)
}

/// `â = S_pl⁻¹(x̄⁽¹⁾ − x̄⁽²⁾)`, solved through the Cholesky factor.
pub fn discriminant_coefficients(est: &PooledEstimates) -> CoefVector {
    CoefVector(est.solve(&est.mean_diff()))
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Cholesky factorization that also rejects numerically singular input.
///
/// The reciprocal condition number is estimated from the factor's diagonal,
/// `(min ℓᵢᵢ / max ℓᵢᵢ)²`, which is cheap and never overestimates it by
/// more than the usual factor for triangular matrices.
pub(crate) fn checked_cholesky(m: DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(m).ok_or(Error::NotPositiveDefinite(what))?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let rcond = (lo / hi).powi(2);
    if !(rcond >= RCOND_FLOOR) {
        return Err(Error::IllConditioned { what, rcond });
    }
    Ok(chol)
}
