//! Limits under `p/(n₁+n₂) → c ∈ [0, 1)`: the normal limit of `lᵀâ` and of
//! the centred plug-in score.

use crate::error::{invalid, Error, Result};
use crate::model::{Group, ProblemDims};
use crate::representation::{McSample, ThetaScalarParams};

/// Relative slack on `Δ² ≥ η²/lᵀΣ⁻¹l`.
const CAUCHY_SCHWARZ_TOL: f64 = 1e-10;

/// Tolerance on `1/b₁ + 1/b₂ = 1`.
const B_IDENTITY_TOL: f64 = 1e-9;

/// Inputs of the limiting variance of `θ̂ = lᵀâ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefLimitParams {
    /// `lᵀΣ⁻¹(μ₁−μ₂)`.
    pub eta: f64,
    /// `lᵀΣ⁻¹l`.
    pub l_quad: f64,
    /// `Δ²`.
    pub delta_sq: f64,
    pub c: f64,
    pub gamma: f64,
    /// `λ(n₁+n₂)`.
    pub lambda_n: f64,
}

impl CoefLimitParams {
    pub fn new(eta: f64, l_quad: f64, delta_sq: f64, c: f64, gamma: f64, lambda_n: f64) -> Result<Self> {
        if !(c >= 0.0 && c < 1.0) {
            return Err(invalid("c", format!("must lie in [0, 1), got {c}")));
        }
        if !(l_quad > 0.0 && l_quad.is_finite()) {
            return Err(invalid("l_quad", "must be positive"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", "must be finite and nonnegative"));
        }
        if !(lambda_n > 0.0 && lambda_n.is_finite()) {
            return Err(invalid("lambda_n", "must be positive"));
        }
        if !eta.is_finite() || !delta_sq.is_finite() {
            return Err(Error::NonFinite("limit parameters"));
        }
        let bound = eta * eta / l_quad;
        if delta_sq < bound - CAUCHY_SCHWARZ_TOL * bound.max(1.0) {
            return Err(invalid(
                "delta_sq",
                format!("Δ² = {delta_sq} is below η²/lᵀΣ⁻¹l = {bound}"),
            ));
        }
        Ok(Self {
            eta,
            l_quad,
            delta_sq,
            c,
            gamma,
            lambda_n,
        })
    }

    /// Parameters of a concrete instance, with `c = p/(n₁+n₂)`.
    pub fn from_theta(params: &ThetaScalarParams, gamma: f64) -> Result<Self> {
        let dims = params.dims;
        Self::new(
            params.eta,
            params.l_quad,
            params.delta_sq(),
            dims.c(),
            gamma,
            dims.lambda() * dims.n_total() as f64,
        )
    }
}

/// `σ²_γ = (η² + lᵀΣ⁻¹l·Δ² + λ(n₁+n₂)·lᵀΣ⁻¹l·𝟙{γ=0}) / (1−c)³`.
pub fn sigma_gamma_sq(params: &CoefLimitParams) -> f64 {
    let zero = if params.gamma == 0.0 {
        params.lambda_n * params.l_quad
    } else {
        0.0
    };
    (params.eta * params.eta + params.l_quad * params.delta_sq + zero) / (1.0 - params.c).powi(3)
}

/// Affine map `θ ↦ √(n₁+n₂)/σ_γ · (θ − η/(1−c))` and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaStandardization {
    pub center: f64,
    pub scale: f64,
}

impl ThetaStandardization {
    pub fn new(params: &CoefLimitParams, n_total: usize) -> Result<Self> {
        if n_total == 0 {
            return Err(invalid("n_total", "must be positive"));
        }
        let sigma = sigma_gamma_sq(params).sqrt();
        if !(sigma > 0.0) {
            return Err(Error::ZeroVariance);
        }
        Ok(Self {
            center: params.eta / (1.0 - params.c),
            scale: (n_total as f64).sqrt() / sigma,
        })
    }

    pub fn apply(&self, theta: f64) -> f64 {
        self.scale * (theta - self.center)
    }

    pub fn invert(&self, z: f64) -> f64 {
        z / self.scale + self.center
    }
}

/// Standardizes draws of `θ̂` by [`ThetaStandardization`].
pub fn standardize_theta(draws: &McSample, params: &CoefLimitParams, n_total: usize) -> Result<McSample> {
    if !draws.kind().is_theta() {
        return Err(invalid(
            "draws",
            format!("expected coefficient draws, got {}", draws.kind()),
        ));
    }
    let map = ThetaStandardization::new(params, n_total)?;
    let out = draws.draws().iter().map(|&t| map.apply(t)).collect();
    let mut sample = McSample::new(out, draws.kind())?;
    for (k, v) in draws.meta() {
        sample = sample.with_meta(k.clone(), v);
    }
    Ok(sample.with_meta("standardized_gamma", params.gamma))
}

/// Normal limit of `p^{min(γ,1)/2}(d̂/p^γ − (−1)^{i−1}·a)` for group `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreLimit {
    pub mean: f64,
    pub variance: f64,
    pub group: Group,
}

/// Mean `(−1)^{i−1}·c/(1−c)·(b_i−2)/(2b_i)·(b₁+b₂)·𝟙{γ=0}` and variance
/// `c/(2(1−c)³)·Δ̃⁴·𝟙{γ≥1} + (c(b₁+b₂)·𝟙{γ=0} + Δ̃²·𝟙{γ≤1})/(1−c)³`.
/// At `γ = 1` both of the last two indicator terms are active.
pub fn score_limit(gamma: f64, c: f64, b1: f64, b2: f64, delta_tilde_sq: f64, group: Group) -> Result<ScoreLimit> {
    if !(c >= 0.0 && c < 1.0) {
        return Err(invalid("c", format!("must lie in [0, 1), got {c}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", "must be finite and nonnegative"));
    }
    if !(b1 > 0.0 && b2 > 0.0) || (1.0 / b1 + 1.0 / b2 - 1.0).abs() > B_IDENTITY_TOL {
        return Err(invalid("b", "need b1, b2 > 0 with 1/b1 + 1/b2 = 1"));
    }
    if !(delta_tilde_sq >= 0.0 && delta_tilde_sq.is_finite()) {
        return Err(invalid("delta_tilde_sq", "must be finite and nonnegative"));
    }
    let k3 = (1.0 - c).powi(3);
    let zero = gamma == 0.0;
    let b_i = match group {
        Group::First => b1,
        Group::Second => b2,
    };
    let mean = if zero {
        group.sign() * c / (1.0 - c) * (b_i - 2.0) / (2.0 * b_i) * (b1 + b2)
    } else {
        0.0
    };
    let mut variance = 0.0;
    if gamma >= 1.0 {
        variance += c / (2.0 * k3) * delta_tilde_sq * delta_tilde_sq;
    }
    if zero {
        variance += c * (b1 + b2) / k3;
    }
    if gamma <= 1.0 {
        variance += delta_tilde_sq / k3;
    }
    if !(variance > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(ScoreLimit { mean, variance, group })
}

/// Centres and scales a score draw as in the limit statement, with the
/// finite-sample ratio `(n₁+n₂−2)/(n₁+n₂−p−1)` in the centring:
/// `p^{min(γ,1)/2}·(d̂/p^γ − (n₁+n₂−2)/(n₁+n₂−p−1)·(−1)^{i−1}·½p^{−γ}Δ²)`.
pub fn center_score(d_hat: f64, delta: f64, dims: ProblemDims, gamma: f64, group: Group) -> f64 {
    let p = dims.p() as f64;
    let ratio = dims.pooled_dof() / dims.xi_dof().as_f64();
    let pg = p.powf(-gamma);
    let center = ratio * group.sign() * 0.5 * pg * delta * delta;
    p.powf(0.5 * gamma.min(1.0)) * (d_hat * pg - center)
}
