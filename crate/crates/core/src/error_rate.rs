//! Misclassification rates of the optimal and the plug-in linear rule:
//! closed form, Monte Carlo through the score representation, and the
//! high-dimensional approximation.

use nalgebra::DVector;

use crate::distributions::standard_normal_cdf;
use crate::error::{invalid, Error, Result};
use crate::model::{discriminant_coefficients, Group, PooledEstimates, PopulationModel, ProblemDims};
use crate::oracle::{plug_in_score, RawDataSimulator};
use crate::representation::{sample_d_hat, DHatParams};
use crate::rng::{replicate, try_replicate, RngStream};

/// Tolerance on `1/b₁ + 1/b₂ = 1`.
const B_IDENTITY_TOL: f64 = 1e-9;

/// Stream offset between consecutive Δ values of a curve.
const CURVE_STRIDE: u64 = 1 << 34;

/// Error rate of the rule built on the true parameters, `Φ(−Δ/2)`.
pub fn er_population(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(standard_normal_cdf(-0.5 * delta))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid("delta", format!("must be finite and nonnegative, got {delta}")));
    }
    Ok(())
}

/// Monte Carlo estimate of an error rate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRateEstimate {
    pub value: f64,
    pub standard_error: f64,
    /// Misclassification frequency among observations from group 1.
    pub first_group: f64,
    /// Misclassification frequency among observations from group 2.
    pub second_group: f64,
    pub replications: usize,
}

impl ErrorRateEstimate {
    fn from_counts(wrong1: usize, wrong2: usize, b: usize) -> Self {
        let bf = b as f64;
        let (p1, p2) = (wrong1 as f64 / bf, wrong2 as f64 / bf);
        Self {
            value: 0.5 * (p1 + p2),
            standard_error: 0.5 * ((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / bf).sqrt(),
            first_group: p1,
            second_group: p2,
            replications: b,
        }
    }
}

/// Error rate of the plug-in rule,
/// `½·P(d̂ ≤ 0 | group 1) + ½·P(d̂ > 0 | group 2)`, from `b` draws of the
/// score representation per group. Group 1 uses streams `base.child(j)`,
/// group 2 `base.child(b + j)`.
pub fn er_sample_mc(delta: f64, dims: ProblemDims, b: usize, base: RngStream) -> Result<ErrorRateEstimate> {
    if b == 0 {
        return Err(invalid("B", "need at least one replication"));
    }
    let first = DHatParams::new(delta, dims, Group::First)?;
    let second = DHatParams::new(delta, dims, Group::Second)?;
    let wrong1 = replicate(base, b, |s| sample_d_hat(&s, &first) <= 0.0);
    let wrong2 = replicate(base.child(b as u64), b, |s| sample_d_hat(&s, &second) > 0.0);
    Ok(ErrorRateEstimate::from_counts(
        wrong1.iter().filter(|&&w| w).count(),
        wrong2.iter().filter(|&&w| w).count(),
        b,
    ))
}

/// Error rate of the plug-in rule estimated by brute force: every
/// replication simulates a training set, builds the rule and classifies one
/// new observation. Streams are allocated as in [`er_sample_mc`].
pub fn er_raw_data_mc(
    model: &PopulationModel,
    dims: ProblemDims,
    b: usize,
    base: RngStream,
) -> Result<ErrorRateEstimate> {
    if b == 0 {
        return Err(invalid("B", "need at least one replication"));
    }
    let sim = RawDataSimulator::new(model, dims)?;
    let wrong = |group: Group, s: RngStream| -> Result<bool> {
        let est = sim.estimates(&s)?;
        let x = sim.new_observation(&s, group);
        Ok(classify(&x, &est)? != group)
    };
    let wrong1 = try_replicate(base, b, |s| wrong(Group::First, s))?;
    let wrong2 = try_replicate(base.child(b as u64), b, |s| wrong(Group::Second, s))?;
    Ok(ErrorRateEstimate::from_counts(
        wrong1.iter().filter(|&&w| w).count(),
        wrong2.iter().filter(|&&w| w).count(),
        b,
    ))
}

/// Exact error rate of a trained plug-in rule on new data from `model`:
/// `½Φ(−âᵀ(μ₁−m̂)/σ) + ½Φ(âᵀ(μ₂−m̂)/σ)`, `m̂ = ½(x̄⁽¹⁾+x̄⁽²⁾)`, `σ² = âᵀΣâ`.
pub fn conditional_error_rate(est: &PooledEstimates, model: &PopulationModel) -> Result<f64> {
    if model.p() != est.dims().p() {
        return Err(Error::DimensionMismatch {
            expected: est.dims().p(),
            found: model.p(),
        });
    }
    let a = discriminant_coefficients(est).into_inner();
    let sd = a.dot(&(model.sigma() * &a)).sqrt();
    if !(sd > 0.0) {
        // a degenerate rule sends everything to group 2
        return Ok(0.5);
    }
    let mid = (est.xbar1() + est.xbar2()) * 0.5;
    let s1 = a.dot(&(model.mu1() - &mid)) / sd;
    let s2 = a.dot(&(model.mu2() - &mid)) / sd;
    Ok(0.5 * standard_normal_cdf(-s1) + 0.5 * (1.0 - standard_normal_cdf(-s2)))
}

/// Parameters of the high-dimensional error-rate approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticErParams {
    pub gamma: f64,
    pub c: f64,
    /// Limit of `λn₁`.
    pub b1: f64,
    /// Limit of `λn₂`.
    pub b2: f64,
}

impl AsymptoticErParams {
    pub fn new(gamma: f64, c: f64, b1: f64, b2: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be finite and nonnegative, got {gamma}")));
        }
        if !(c >= 0.0 && c < 1.0) {
            return Err(invalid("c", format!("must lie in [0, 1), got {c}")));
        }
        if !(b1 > 0.0 && b2 > 0.0) {
            return Err(invalid("b", "b1 and b2 must be positive"));
        }
        if (1.0 / b1 + 1.0 / b2 - 1.0).abs() > B_IDENTITY_TOL {
            return Err(invalid(
                "b",
                format!("1/b1 + 1/b2 must equal 1, got {}", 1.0 / b1 + 1.0 / b2),
            ));
        }
        Ok(Self { gamma, c, b1, b2 })
    }

    /// `c = p/(n₁+n₂)` and `b_i = λn_i` of a concrete instance.
    pub fn from_dims(dims: ProblemDims, gamma: f64) -> Result<Self> {
        Self::new(gamma, dims.c(), dims.b(Group::First), dims.b(Group::Second))
    }

    /// Equal group sizes, `b₁ = b₂ = 2`.
    pub fn equal_sizes(c: f64, gamma: f64) -> Result<Self> {
        Self::new(gamma, c, 2.0, 2.0)
    }

    fn is_zero_gamma(&self) -> bool {
        self.gamma == 0.0
    }

    /// Limiting means `(m₁, m₂)` of the centred, scaled score.
    pub fn means(&self) -> (f64, f64) {
        if !self.is_zero_gamma() {
            return (0.0, 0.0);
        }
        let k = self.c / (1.0 - self.c) * (self.b1 + self.b2);
        (
            k * (self.b1 - 2.0) / (2.0 * self.b1),
            -k * (self.b2 - 2.0) / (2.0 * self.b2),
        )
    }

    /// Limiting variance `v²` at `Δ̃² = p^{−γ}Δ²`.
    pub fn variance(&self, delta_tilde_sq: f64) -> f64 {
        let g = self.gamma;
        let c = self.c;
        let k3 = (1.0 - c).powi(3);
        let mut v = 0.0;
        if g >= 1.0 {
            v += c / (2.0 * k3) * delta_tilde_sq * delta_tilde_sq;
        }
        if self.is_zero_gamma() {
            v += c * (self.b1 + self.b2) / k3;
        }
        if g <= 1.0 {
            v += delta_tilde_sq / k3;
        }
        v
    }
}

/// `Δ̃² ≈ p^{−γ}Δ²`.
pub fn delta_tilde_sq(delta: f64, p: usize, gamma: f64) -> f64 {
    (p as f64).powf(-gamma) * delta * delta
}

/// High-dimensional approximation of the plug-in error rate,
///
/// `½(1 − Φ((a·p^{min(γ,1)/2} − m₂)/v)) + ½Φ((−a·p^{min(γ,1)/2} − m₁)/v)`,
///
/// with `a = ½p^{−γ}Δ²/(1−c)`, the finite-sample ratio
/// `(n₁+n₂−2)/(n₁+n₂−p−1)` in the centring replaced by `1/(1−c)`.
pub fn er_sample_asymptotic(delta: f64, p: usize, params: &AsymptoticErParams) -> Result<f64> {
    check_delta(delta)?;
    if p == 0 {
        return Err(invalid("p", "must be at least 1"));
    }
    let dt = delta_tilde_sq(delta, p, params.gamma);
    let a = 0.5 * dt / (1.0 - params.c);
    let v = params.variance(dt).sqrt();
    if v == 0.0 {
        // Δ = 0 with γ > 0: the score carries no information
        return Ok(0.5);
    }
    let (m1, m2) = params.means();
    let shift = a * (p as f64).powf(0.5 * params.gamma.min(1.0));
    Ok(0.5 * (1.0 - standard_normal_cdf((shift - m2) / v)) + 0.5 * standard_normal_cdf((-shift - m1) / v))
}

/// Factor `h_c` with `ER_s ≈ Φ(−h_c·Δ/2)` for equal group sizes:
///
/// `h_c = p^{min(γ,1)/2−γ}·√(1−c)·Δ / √X`,
/// `X = c(p^{−γ}Δ²)²·𝟙{γ≥1}/2 + 4c·𝟙{γ=0} + p^{−γ}Δ²·𝟙{γ≤1}`.
///
/// Equals `√(1−c)` for `γ ∈ (0,1)`; at `Δ = 0` the `Δ → 0` limit is
/// returned.
pub fn h_c_factor(delta: f64, p: usize, c: f64, gamma: f64) -> Result<f64> {
    check_delta(delta)?;
    let params = AsymptoticErParams::equal_sizes(c, gamma)?;
    if p == 0 {
        return Err(invalid("p", "must be at least 1"));
    }
    let pf = p as f64;
    let scale = pf.powf(0.5 * gamma.min(1.0) - gamma) * (1.0 - c).sqrt();
    if delta == 0.0 {
        return Ok(if gamma == 0.0 {
            0.0
        } else if gamma <= 1.0 {
            scale * pf.powf(0.5 * gamma)
        } else {
            f64::INFINITY
        });
    }
    // X = (1−c)³·v², the variance with the (1−c)⁻³ factor removed
    let x = params.variance(delta_tilde_sq(delta, p, gamma)) * (1.0 - c).powi(3);
    Ok(scale * delta / x.sqrt())
}

/// Plug-in rule: group 1 iff `(x̄⁽¹⁾−x̄⁽²⁾)ᵀS_pl⁻¹(x − ½(x̄⁽¹⁾+x̄⁽²⁾)) > 0`.
pub fn classify(x_new: &DVector<f64>, est: &PooledEstimates) -> Result<Group> {
    Ok(if plug_in_score(est, x_new)? > 0.0 {
        Group::First
    } else {
        Group::Second
    })
}

/// Optimal rule: group 1 iff `(μ₁−μ₂)ᵀΣ⁻¹(x − ½(μ₁+μ₂)) > 0`.
pub fn classify_population(x_new: &DVector<f64>, model: &PopulationModel) -> Result<Group> {
    if x_new.len() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            found: x_new.len(),
        });
    }
    let a = model.sigma_solve(&model.mean_diff());
    let mid = (model.mu1() + model.mu2()) * 0.5;
    Ok(if a.dot(&(x_new - mid)) > 0.0 {
        Group::First
    } else {
        Group::Second
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErMethod {
    Population,
    McFinite,
    Asymptotic,
}

impl ErMethod {
    pub fn name(self) -> &'static str {
        match self {
            ErMethod::Population => "population",
            ErMethod::McFinite => "mc_finite",
            ErMethod::Asymptotic => "asymptotic",
        }
    }
}

/// Settings a curve was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurveConfig {
    pub p: Option<usize>,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
}

/// Error rates over a grid of Δ values.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRateCurve {
    pub deltas: Vec<f64>,
    pub er_values: Vec<f64>,
    /// Monte Carlo standard errors, present for [`ErMethod::McFinite`].
    pub standard_errors: Option<Vec<f64>>,
    pub method: ErMethod,
    pub config: CurveConfig,
}

impl ErrorRateCurve {
    pub fn population(deltas: &[f64]) -> Result<Self> {
        Ok(Self {
            deltas: deltas.to_vec(),
            er_values: deltas.iter().map(|&d| er_population(d)).collect::<Result<_>>()?,
            standard_errors: None,
            method: ErMethod::Population,
            config: CurveConfig::default(),
        })
    }

    /// Δ index `k` uses streams from `base.child(k·2³⁴)`.
    pub fn monte_carlo(deltas: &[f64], dims: ProblemDims, b: usize, base: RngStream) -> Result<Self> {
        let est = deltas
            .iter()
            .enumerate()
            .map(|(k, &d)| er_sample_mc(d, dims, b, base.child(k as u64 * CURVE_STRIDE)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            deltas: deltas.to_vec(),
            er_values: est.iter().map(|e| e.value).collect(),
            standard_errors: Some(est.iter().map(|e| e.standard_error).collect()),
            method: ErMethod::McFinite,
            config: CurveConfig {
                p: Some(dims.p()),
                n1: Some(dims.n1()),
                n2: Some(dims.n2()),
                replications: Some(b),
                seed: Some(base.seed()),
                ..CurveConfig::default()
            },
        })
    }

    pub fn asymptotic(deltas: &[f64], p: usize, params: &AsymptoticErParams) -> Result<Self> {
        Ok(Self {
            deltas: deltas.to_vec(),
            er_values: deltas
                .iter()
                .map(|&d| er_sample_asymptotic(d, p, params))
                .collect::<Result<_>>()?,
            standard_errors: None,
            method: ErMethod::Asymptotic,
            config: CurveConfig {
                p: Some(p),
                gamma: Some(params.gamma),
                c: Some(params.c),
                ..CurveConfig::default()
            },
        })
    }
}
