//! Brute-force samplers that simulate complete Gaussian training sets.
//!
//! These are the reference against which the stochastic representations
//! are checked, so they take no shortcuts: every draw generates both
//! observation matrices, pools them and evaluates the statistic directly.
//! Training data come from lane 0 of the stream, a fresh observation to be
//! classified from lane 1.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{
    discriminant_coefficients, pooled_estimates, Group, GroupSample, MvnSampler, PooledEstimates, PopulationModel,
    ProblemDims,
};
use crate::rng::{Lane, RngStream};

const TRAINING: Lane = 0;
const NEW_OBSERVATION: Lane = 1;

/// Simulates training sets of sizes `(n₁, n₂)` from a fixed population.
#[derive(Debug, Clone)]
pub struct RawDataSimulator {
    dims: ProblemDims,
    group1: MvnSampler,
    group2: MvnSampler,
}

impl RawDataSimulator {
    pub fn new(model: &PopulationModel, dims: ProblemDims) -> Result<Self> {
        if model.p() != dims.p() {
            return Err(Error::DimensionMismatch {
                expected: dims.p(),
                found: model.p(),
            });
        }
        let factor = model.sigma_factor();
        Ok(Self {
            dims,
            group1: MvnSampler::from_factor(model.mu1().clone(), factor.clone()),
            group2: MvnSampler::from_factor(model.mu2().clone(), factor),
        })
    }

    pub fn dims(&self) -> ProblemDims {
        self.dims
    }

    pub fn samples(&self, stream: &RngStream) -> Result<(GroupSample, GroupSample)> {
        let mut rng = stream.lane(TRAINING);
        let x1 = self.group1.sample_matrix(&mut rng, self.dims.n1());
        let x2 = self.group2.sample_matrix(&mut rng, self.dims.n2());
        Ok((
            GroupSample::new(x1, Group::First)?,
            GroupSample::new(x2, Group::Second)?,
        ))
    }

    pub fn estimates(&self, stream: &RngStream) -> Result<PooledEstimates> {
        let (x1, x2) = self.samples(stream)?;
        pooled_estimates(&x1, &x2)
    }

    /// A new observation from `group`, independent of the training data.
    pub fn new_observation(&self, stream: &RngStream, group: Group) -> DVector<f64> {
        let mut rng = stream.lane(NEW_OBSERVATION);
        match group {
            Group::First => self.group1.sample(&mut rng),
            Group::Second => self.group2.sample(&mut rng),
        }
    }
}

/// Plug-in score `(x̄⁽¹⁾−x̄⁽²⁾)ᵀS_pl⁻¹(x − ½(x̄⁽¹⁾+x̄⁽²⁾))`.
pub fn plug_in_score(est: &PooledEstimates, x: &DVector<f64>) -> Result<f64> {
    if x.len() != est.dims().p() {
        return Err(Error::DimensionMismatch {
            expected: est.dims().p(),
            found: x.len(),
        });
    }
    let a = discriminant_coefficients(est).into_inner();
    let mid = (est.xbar1() + est.xbar2()) * 0.5;
    Ok(a.dot(&(x - mid)))
}

/// One draw of `lᵀS_pl⁻¹(x̄⁽¹⁾ − x̄⁽²⁾)` from simulated raw data.
pub fn brute_force_theta(
    stream: &RngStream,
    model: &PopulationModel,
    l: &DVector<f64>,
    dims: ProblemDims,
) -> Result<f64> {
    if l.len() != dims.p() {
        return Err(Error::DimensionMismatch {
            expected: dims.p(),
            found: l.len(),
        });
    }
    let est = RawDataSimulator::new(model, dims)?.estimates(stream)?;
    Ok(l.dot(discriminant_coefficients(&est).values()))
}

/// One draw of the plug-in score of a new observation from `group`, with
/// the training data simulated afresh.
pub fn brute_force_d_hat(stream: &RngStream, model: &PopulationModel, dims: ProblemDims, group: Group) -> Result<f64> {
    let sim = RawDataSimulator::new(model, dims)?;
    let est = sim.estimates(stream)?;
    plug_in_score(&est, &sim.new_observation(stream, group))
}

/// `ξ = (n₁+n₂−2)·x̌ᵀΣ⁻¹x̌ / x̌ᵀS_pl⁻¹x̌` with `x̌ = x̄⁽¹⁾ − x̄⁽²⁾`, which is
/// χ²(n₁+n₂−p−1) distributed.
pub fn xi_statistic(stream: &RngStream, model: &PopulationModel, dims: ProblemDims) -> Result<f64> {
    let est = RawDataSimulator::new(model, dims)?.estimates(stream)?;
    let d = est.mean_diff();
    let num = d.dot(&model.sigma_solve(&d));
    let den = d.dot(&est.solve(&d));
    Ok(dims.pooled_dof() * num / den)
}
