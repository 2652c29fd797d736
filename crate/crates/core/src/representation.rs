//! Exact samplers for the discriminant coefficients and the plug-in score,
//! built from a few independent univariate draws instead of raw data.
//!
//! Every sampler reads its components from fixed lanes of the supplied
//! stream, so a draw is a pure function of `(seed, stream_id)` and the
//! parameters. Scalar lanes, in allocation order:
//!
//! | lane | component |
//! |------|-----------|
//! | 0 | ξ ∼ χ²(n₁+n₂−p−1) |
//! | 1 | z₀ ∼ N(0, 1) |
//! | 2 | w₀ ∼ N(0, 1) |
//! | 3 | ξ₂ ∼ χ²(p−1) |
//! | 4 | ξ₁, noncentral χ²(p−1) |
//! | 5 | u, noncentral F(p−1, n₁+n₂−p) |
//!
//! The vector sampler uses lane 0 for ξ, lane 1 for the k standard normals
//! of t₀, lane 2 for the χ²(n₁+n₂−p) of t₀ and lane 6 for x̌.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::distributions::{
    sample_chi_square, sample_noncentral_chi_square, sample_noncentral_f, sample_standard_normal, Noncentrality,
};
use crate::error::{invalid, Error, Result};
use crate::model::{spd_sqrt, Group, MvnSampler, PopulationModel, ProblemDims};
use crate::rng::RngStream;

pub mod lanes {
    use crate::rng::Lane;

    pub const XI: Lane = 0;
    pub const Z0: Lane = 1;
    pub const W0: Lane = 2;
    pub const XI2: Lane = 3;
    pub const XI1: Lane = 4;
    pub const U: Lane = 5;
    pub const X_CHECK: Lane = 6;
}

/// Relative tolerance on the Cauchy–Schwarz bound `η² ≤ Δ²·lᵀΣ⁻¹l`.
const CAUCHY_SCHWARZ_TOL: f64 = 1e-10;

/// Summary of the population that fixes the law of `lᵀâ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaScalarParams {
    /// `lᵀΣ⁻¹(μ₁ − μ₂)`, not normalized.
    pub eta: f64,
    /// `lᵀΣ⁻¹l`.
    pub l_quad: f64,
    /// `(μ₁ − μ₂)ᵀR_l(μ₁ − μ₂)`.
    pub s: f64,
    pub dims: ProblemDims,
}

impl ThetaScalarParams {
    pub fn new(eta: f64, l_quad: f64, s: f64, dims: ProblemDims) -> Result<Self> {
        if !eta.is_finite() {
            return Err(invalid("eta", "must be finite"));
        }
        if !(l_quad > 0.0 && l_quad.is_finite()) {
            return Err(invalid("l_quad", format!("must be positive, got {l_quad}")));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(invalid("s", format!("must be finite and nonnegative, got {s}")));
        }
        Ok(Self { eta, l_quad, s, dims })
    }

    pub fn from_model(model: &PopulationModel, l: &DVector<f64>, dims: ProblemDims) -> Result<Self> {
        if l.len() != model.p() {
            return Err(Error::DimensionMismatch {
                expected: model.p(),
                found: l.len(),
            });
        }
        if model.p() != dims.p() {
            return Err(Error::DimensionMismatch {
                expected: dims.p(),
                found: model.p(),
            });
        }
        let eta = l.dot(&model.sigma_solve(&model.mean_diff()));
        let l_quad = l.dot(&model.sigma_solve(l));
        if !(l_quad > 0.0) {
            return Err(invalid("l", "lᵀΣ⁻¹l must be positive (l = 0?)"));
        }
        let delta_sq = model.delta_sq();
        let mut s = delta_sq - eta * eta / l_quad;
        if s < 0.0 {
            if s < -CAUCHY_SCHWARZ_TOL * delta_sq.max(1.0) {
                return Err(invalid("s", format!("Cauchy–Schwarz violated: s = {s}")));
            }
            s = 0.0;
        }
        Self::new(eta, l_quad, s, dims)
    }

    /// `η / √(lᵀΣ⁻¹l)`, the form that enters the density of the test statistic.
    pub fn normalized_eta(&self) -> f64 {
        self.eta / self.l_quad.sqrt()
    }

    /// `Δ² = s + η²/lᵀΣ⁻¹l`.
    pub fn delta_sq(&self) -> f64 {
        self.s + self.eta * self.eta / self.l_quad
    }
}

/// One draw of `θ̂ = lᵀâ`:
///
/// `(n₁+n₂−2)/ξ · (η + √((λ + λ(p−1)u/(n₁+n₂−p))·lᵀΣ⁻¹l) · z₀)`
///
/// with `u ∼ F(p−1, n₁+n₂−p, s/λ)`; for `p = 1` the F term is absent.
pub fn sample_theta_scalar(stream: &RngStream, params: &ThetaScalarParams) -> f64 {
    let dims = params.dims;
    let lambda = dims.lambda();
    let xi = sample_chi_square(&mut stream.lane(lanes::XI), dims.xi_dof());
    let z0 = sample_standard_normal(&mut stream.lane(lanes::Z0));
    let spread = match dims.residual_dof() {
        Some(d1) => {
            let ncp = Noncentrality::new(params.s / lambda).expect("s and λ validated");
            let u = sample_noncentral_f(&mut stream.lane(lanes::U), d1, dims.w_dof(), ncp);
            lambda + lambda * d1.as_f64() * u / dims.w_dof().as_f64()
        }
        None => lambda,
    };
    dims.pooled_dof() / xi * (params.eta + (spread * params.l_quad).sqrt() * z0)
}

/// Sampler of `θ̂ = Lâ` for a fixed population and full-row-rank `L`.
#[derive(Debug, Clone)]
pub struct ThetaVectorSampler {
    dims: ProblemDims,
    l_mat: DMatrix<f64>,
    x_check: MvnSampler,
    model: PopulationModel,
    /// `LΣ⁻¹Lᵀ`.
    l_sigma_inv_lt: DMatrix<f64>,
}

impl ThetaVectorSampler {
    pub fn new(model: &PopulationModel, l_mat: &DMatrix<f64>, dims: ProblemDims) -> Result<Self> {
        let p = dims.p();
        if model.p() != p || l_mat.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: l_mat.ncols(),
            });
        }
        let k = l_mat.nrows();
        if k == 0 || k >= p {
            return Err(invalid("L", format!("need 1 ≤ k < p rows, got k = {k}, p = {p}")));
        }
        let rank = numerical_rank(l_mat);
        if rank < k {
            return Err(Error::RankDeficient { rank, rows: k });
        }
        let lambda = dims.lambda();
        let factor = model.sigma_factor() * lambda.sqrt();
        let x_check = MvnSampler::from_factor(model.mean_diff(), factor);
        let sigma_inv_lt = DMatrix::from_columns(
            &(0..k)
                .map(|r| model.sigma_solve(&l_mat.row(r).transpose()))
                .collect::<Vec<_>>(),
        );
        let l_sigma_inv_lt = l_mat * &sigma_inv_lt;
        Ok(Self {
            dims,
            l_mat: l_mat.clone(),
            x_check,
            model: model.clone(),
            l_sigma_inv_lt,
        })
    }

    pub fn k(&self) -> usize {
        self.l_mat.nrows()
    }

    /// One draw of
    /// `(n₁+n₂−2)/ξ · (LΣ⁻¹x̌ + √(x̌ᵀΣ⁻¹x̌/(n₁+n₂−p)) · (L R_x̌ Lᵀ)^{1/2} t₀)`.
    pub fn sample(&self, stream: &RngStream) -> Result<DVector<f64>> {
        let dims = self.dims;
        let w_dof = dims.w_dof();
        let xi = sample_chi_square(&mut stream.lane(lanes::XI), dims.xi_dof());
        let x_check = self.x_check.sample(&mut stream.lane(lanes::X_CHECK));
        let mut z_rng = stream.lane(lanes::Z0);
        let z = DVector::from_fn(self.k(), |_, _| sample_standard_normal(&mut z_rng));
        let w = sample_chi_square(&mut stream.lane(lanes::W0), w_dof);
        let t0 = z / (w / w_dof.as_f64()).sqrt();

        let v = self.model.sigma_solve(&x_check);
        let q = x_check.dot(&v);
        let lv = &self.l_mat * &v;
        // L R_x̌ Lᵀ = LΣ⁻¹Lᵀ − (LΣ⁻¹x̌)(LΣ⁻¹x̌)ᵀ / x̌ᵀΣ⁻¹x̌
        let mut middle = &self.l_sigma_inv_lt - (&lv * lv.transpose()) / q;
        crate::model::symmetrize(&mut middle);
        let root = spd_sqrt(&middle)?;
        let theta = (&lv + root * t0 * (q / w_dof.as_f64()).sqrt()) * (dims.pooled_dof() / xi);
        if !theta.iter().all(|t| t.is_finite()) {
            return Err(Error::NonFinite("theta vector draw"));
        }
        Ok(theta)
    }
}

/// One draw of `θ̂ = Lâ`; prefer [`ThetaVectorSampler`] in loops.
pub fn sample_theta_vector(
    stream: &RngStream,
    model: &PopulationModel,
    l_mat: &DMatrix<f64>,
    dims: ProblemDims,
) -> Result<DVector<f64>> {
    ThetaVectorSampler::new(model, l_mat, dims)?.sample(stream)
}

/// Rank from a column-pivoted QR of `m`, counting diagonal entries of R
/// above `max(rows, cols)·ε·|r₀₀|`.
fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].abs()).collect();
    let top = diag.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * top;
    diag.iter().filter(|&&d| d > tol).count()
}

/// Parameters of the plug-in score for a new observation from `group`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DHatParams {
    /// Mahalanobis distance Δ.
    pub delta: f64,
    pub dims: ProblemDims,
    pub group: Group,
}

impl DHatParams {
    pub fn new(delta: f64, dims: ProblemDims, group: Group) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("must be finite and nonnegative, got {delta}")));
        }
        Ok(Self { delta, dims, group })
    }

    /// `δ²` for given `(ξ₂, w₀)`: `n₁n₂/n_i² · Δ²ξ₂ / (λξ₂ + (Δ + √λ w₀)²)`.
    pub fn xi1_noncentrality(&self, xi2: f64, w0: f64) -> f64 {
        let dims = self.dims;
        let lambda = dims.lambda();
        let ni = dims.n(self.group) as f64;
        let shifted = self.delta + lambda.sqrt() * w0;
        let denom = lambda * xi2 + shifted * shifted;
        if denom == 0.0 {
            return 0.0;
        }
        (dims.n1() as f64 * dims.n2() as f64 / (ni * ni)) * self.delta * self.delta * xi2 / denom
    }
}

/// One draw of the plug-in score `d̂` of a new observation from group `i`:
///
/// `(n₁+n₂−2)/ξ · [ ±(λn_i−2)/(2λn_i) · Q ± (Δ² + √λΔw₀)/(λn_i)
///   + √(1 + 1/(n₁+n₂) + (p−1)u/(n₁+n₂−p)) · √Q · z₀ ]`,
///
/// `Q = λξ₂ + (Δ + √λw₀)²`, sign `(−1)^{i−1}`. For `p = 1`, `ξ₂ = u = 0`.
pub fn sample_d_hat(stream: &RngStream, params: &DHatParams) -> f64 {
    let dims = params.dims;
    let lambda = dims.lambda();
    let delta = params.delta;
    let sign = params.group.sign();
    let lam_ni = dims.b(params.group);
    let n_total = dims.n_total() as f64;

    let xi = sample_chi_square(&mut stream.lane(lanes::XI), dims.xi_dof());
    let z0 = sample_standard_normal(&mut stream.lane(lanes::Z0));
    let w0 = sample_standard_normal(&mut stream.lane(lanes::W0));
    let (xi2, u_term) = match dims.residual_dof() {
        Some(d1) => {
            let xi2 = sample_chi_square(&mut stream.lane(lanes::XI2), d1);
            let ncp = Noncentrality::new(params.xi1_noncentrality(xi2, w0)).unwrap_or(Noncentrality::ZERO);
            let xi1 = sample_noncentral_chi_square(&mut stream.lane(lanes::XI1), d1, ncp);
            let u_ncp = Noncentrality::new(xi1 / n_total).unwrap_or(Noncentrality::ZERO);
            let u = sample_noncentral_f(&mut stream.lane(lanes::U), d1, dims.w_dof(), u_ncp);
            (xi2, d1.as_f64() * u / dims.w_dof().as_f64())
        }
        None => (0.0, 0.0),
    };
    let shifted = delta + lambda.sqrt() * w0;
    let q = lambda * xi2 + shifted * shifted;
    let bracket = sign * (lam_ni - 2.0) / (2.0 * lam_ni) * q
        + sign / lam_ni * (delta * delta + lambda.sqrt() * delta * w0)
        + (1.0 + 1.0 / n_total + u_term).sqrt() * q.sqrt() * z0;
    dims.pooled_dof() / xi * bracket
}

/// What produced the draws of an [`McSample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleKind {
    ThetaRep,
    ThetaOracle,
    DHatRep,
    DHatOracle,
    TStat,
}

impl SampleKind {
    pub fn is_theta(self) -> bool {
        matches!(self, SampleKind::ThetaRep | SampleKind::ThetaOracle)
    }
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleKind::ThetaRep => "theta_rep",
            SampleKind::ThetaOracle => "theta_oracle",
            SampleKind::DHatRep => "dhat_rep",
            SampleKind::DHatOracle => "dhat_oracle",
            SampleKind::TStat => "t_stat",
        })
    }
}

/// Tagged Monte Carlo draws with a snapshot of the parameters behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct McSample {
    draws: Vec<f64>,
    kind: SampleKind,
    meta: BTreeMap<String, String>,
}

impl McSample {
    pub fn new(draws: Vec<f64>, kind: SampleKind) -> Result<Self> {
        if !draws.iter().all(|d| d.is_finite()) {
            return Err(Error::NonFinite("Monte Carlo draw"));
        }
        Ok(Self {
            draws,
            kind,
            meta: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn into_draws(self) -> Vec<f64> {
        self.draws
    }

    pub fn kind(&self) -> SampleKind {
        self.kind
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

fn dims_meta(sample: McSample, dims: ProblemDims) -> McSample {
    sample
        .with_meta("p", dims.p())
        .with_meta("n1", dims.n1())
        .with_meta("n2", dims.n2())
}

/// `b` draws of `lᵀâ`, replication `j` on `base.child(j)`.
pub fn theta_scalar_sample(base: RngStream, b: usize, params: &ThetaScalarParams) -> Result<McSample> {
    let draws = crate::rng::replicate(base, b, |s| sample_theta_scalar(&s, params));
    Ok(dims_meta(McSample::new(draws, SampleKind::ThetaRep)?, params.dims)
        .with_meta("eta", params.eta)
        .with_meta("l_quad", params.l_quad)
        .with_meta("s", params.s)
        .with_meta("seed", base.seed())
        .with_meta("stream", base.stream_id()))
}

/// `b` draws of `d̂`, replication `j` on `base.child(j)`.
pub fn d_hat_sample(base: RngStream, b: usize, params: &DHatParams) -> Result<McSample> {
    let draws = crate::rng::replicate(base, b, |s| sample_d_hat(&s, params));
    Ok(dims_meta(McSample::new(draws, SampleKind::DHatRep)?, params.dims)
        .with_meta("delta", params.delta)
        .with_meta("group", params.group.index())
        .with_meta("seed", base.seed())
        .with_meta("stream", base.stream_id()))
}
