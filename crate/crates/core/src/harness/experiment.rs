//! Figure pipelines: error-rate curves over Δ and density studies of the
//! standardized coefficient.
//!
//! Cell `k` of an experiment draws from streams starting at `k << 40`; the
//! random populations of the density figures come from stream
//! `u64::MAX − k`, so they never overlap with the Monte Carlo draws.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::asymptotics::{standardize_theta, CoefLimitParams};
use crate::distributions::{normal_pdf, standard_normal_cdf};
use crate::error::{invalid, Result};
use crate::error_rate::{er_population, er_sample_asymptotic, AsymptoticErParams, ErrorRateCurve};
use crate::harness::kde::{default_bandwidth, epanechnikov_kde, DEFAULT_GRID_POINTS};
use crate::harness::ks::ks_statistic;
use crate::model::{PopulationModel, ProblemDims};
use crate::representation::{theta_scalar_sample, McSample, ThetaScalarParams};
use crate::rng::RngStream;

const CELL_SHIFT: u32 = 40;

/// Curves of one cell are spaced `2³⁴` streams apart, so at most this many Δ
/// values fit in a cell.
const MAX_DELTAS: usize = 1 << (CELL_SHIFT - 34);

/// Default γ used for the "γ > 0" standardization. Any positive value gives
/// the same limit.
pub const DEFAULT_POSITIVE_GAMMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    FigErrorSmallDim,
    FigErrorAsymptotic,
    FigDensityGamma0,
    FigDensityGammaPos,
    FigDensityUnbalanced,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::FigErrorSmallDim,
        ExperimentKind::FigErrorAsymptotic,
        ExperimentKind::FigDensityGamma0,
        ExperimentKind::FigDensityGammaPos,
        ExperimentKind::FigDensityUnbalanced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FigErrorSmallDim => "fig_error_small_dim",
            ExperimentKind::FigErrorAsymptotic => "fig_error_asymptotic",
            ExperimentKind::FigDensityGamma0 => "fig_density_gamma0",
            ExperimentKind::FigDensityGammaPos => "fig_density_gamma_pos",
            ExperimentKind::FigDensityUnbalanced => "fig_density_unbalanced",
        }
    }

    /// Preset name on the command line, `fig1` … `fig5`.
    pub fn preset_name(self) -> &'static str {
        match self {
            ExperimentKind::FigErrorSmallDim => "fig1",
            ExperimentKind::FigErrorAsymptotic => "fig2",
            ExperimentKind::FigDensityGamma0 => "fig3",
            ExperimentKind::FigDensityGammaPos => "fig4",
            ExperimentKind::FigDensityUnbalanced => "fig5",
        }
    }

    pub fn from_preset_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.preset_name() == name || k.name() == name)
    }

    pub fn is_density(self) -> bool {
        matches!(
            self,
            ExperimentKind::FigDensityGamma0
                | ExperimentKind::FigDensityGammaPos
                | ExperimentKind::FigDensityUnbalanced
        )
    }

    /// Which random-population recipe the density figures use.
    pub fn recipe(self) -> Option<Recipe> {
        match self {
            ExperimentKind::FigDensityGamma0 => Some(Recipe::Sparse),
            ExperimentKind::FigDensityGammaPos | ExperimentKind::FigDensityUnbalanced => Some(Recipe::Dense),
            _ => None,
        }
    }
}

/// Random populations for the density studies. Both draw a diagonal `Σ`
/// with entries uniform on `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    /// First ten entries of `μ₁` and last ten of `μ₂` uniform on `[−1, 1]`,
    /// the rest zero; `Δ²` stays bounded as `p` grows.
    Sparse,
    /// All entries of `μ₁` and `μ₂` uniform on `[−1, 1]`; `Δ²` grows with `p`.
    Dense,
}

impl Recipe {
    pub fn name(self) -> &'static str {
        match self {
            Recipe::Sparse => "sparse",
            Recipe::Dense => "dense",
        }
    }
}

/// Draws a population of dimension `p` from `recipe`.
pub fn recipe_model(p: usize, recipe: Recipe, stream: &RngStream) -> Result<PopulationModel> {
    if p == 0 {
        return Err(invalid("p", "must be positive"));
    }
    let mut rng = stream.rng();
    let mut uniform = || rng.random_range(-1.0..=1.0);
    let (mu1, mu2) = match recipe {
        Recipe::Dense => {
            let mu1 = DVector::from_fn(p, |_, _| uniform());
            let mu2 = DVector::from_fn(p, |_, _| uniform());
            (mu1, mu2)
        }
        Recipe::Sparse => {
            let k = p.min(10);
            let mut mu1 = DVector::zeros(p);
            let mut mu2 = DVector::zeros(p);
            for i in 0..k {
                mu1[i] = uniform();
            }
            for i in p - k..p {
                mu2[i] = uniform();
            }
            (mu1, mu2)
        }
    };
    // 1 − U with U on [0, 1) lies in (0, 1].
    let diag = DVector::from_fn(p, |_, _| 1.0 - rng.random::<f64>());
    PopulationModel::new(mu1, mu2, DMatrix::from_diagonal(&diag))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Cells of the finite-sample and density figures.
    pub dims: Vec<ProblemDims>,
    /// Values of `c` for the asymptotic error-rate figure.
    pub concentrations: Vec<f64>,
    /// Δ grid of the error-rate figures.
    pub deltas: Vec<f64>,
    /// γ of the asymptotic error rate, and the positive γ used for the
    /// second standardization in the density figures.
    pub gamma: f64,
    pub replications: usize,
    pub seed: u64,
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step).round() as usize;
    (0..=count).map(|i| start + i as f64 * step).collect()
}

fn cross(ps: &[usize], ns: &[(usize, usize)]) -> Vec<ProblemDims> {
    ps.iter()
        .flat_map(|&p| {
            ns.iter()
                .map(move |&(n1, n2)| ProblemDims::new(p, n1, n2).expect("preset dims are valid"))
        })
        .collect()
}

impl ExperimentConfig {
    /// The parameterization of the corresponding published figure.
    pub fn preset(kind: ExperimentKind, seed: u64) -> Self {
        let density_ps = [50, 250, 400, 475];
        let (dims, concentrations, deltas, gamma) = match kind {
            ExperimentKind::FigErrorSmallDim => (
                cross(&[10, 25, 50, 75], &[(50, 50), (100, 100), (150, 150), (250, 250)]),
                Vec::new(),
                grid(0.0, 6.0, 0.25),
                0.0,
            ),
            ExperimentKind::FigErrorAsymptotic => (Vec::new(), vec![0.1, 0.5, 0.8, 0.95], grid(0.0, 100.0, 0.5), 0.0),
            ExperimentKind::FigDensityGamma0 | ExperimentKind::FigDensityGammaPos => (
                cross(&density_ps, &[(250, 250)]),
                Vec::new(),
                Vec::new(),
                DEFAULT_POSITIVE_GAMMA,
            ),
            ExperimentKind::FigDensityUnbalanced => (
                cross(&density_ps, &[(25, 475)]),
                Vec::new(),
                Vec::new(),
                DEFAULT_POSITIVE_GAMMA,
            ),
        };
        Self {
            kind,
            dims,
            concentrations,
            deltas,
            gamma,
            replications: 100_000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", "must be finite and nonnegative"));
        }
        match self.kind {
            ExperimentKind::FigErrorSmallDim => {
                self.check_dims()?;
                self.check_deltas()?;
                self.check_replications()?;
                if self.deltas.len() > MAX_DELTAS {
                    return Err(invalid("deltas", format!("at most {MAX_DELTAS} values per cell")));
                }
            }
            ExperimentKind::FigErrorAsymptotic => {
                self.check_deltas()?;
                if self.concentrations.is_empty() {
                    return Err(invalid("concentrations", "need at least one value of c"));
                }
                if let Some(c) = self.concentrations.iter().find(|c| !(**c > 0.0 && **c < 1.0)) {
                    return Err(invalid("c", format!("must lie in (0, 1), got {c}")));
                }
            }
            _ => {
                self.check_dims()?;
                self.check_replications()?;
                if self.kind.is_density() && self.gamma == 0.0 {
                    return Err(invalid("gamma", "the second standardization needs γ > 0"));
                }
            }
        }
        Ok(())
    }

    fn check_dims(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(invalid("dims", "need at least one cell"));
        }
        Ok(())
    }

    fn check_deltas(&self) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(invalid("deltas", "need at least one value of Δ"));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return Err(invalid("delta", format!("must be finite and nonnegative, got {d}")));
        }
        Ok(())
    }

    fn check_replications(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(invalid("replications", "need at least two"));
        }
        Ok(())
    }

    /// Settings as key–value pairs, in a fixed order.
    pub fn describe(&self) -> Vec<(String, String)> {
        let list = |v: Vec<String>| v.join(" ");
        let mut out = vec![
            ("experiment".to_string(), self.kind.name().to_string()),
            ("seed".to_string(), self.seed.to_string()),
        ];
        if !self.dims.is_empty() {
            let cells = self
                .dims
                .iter()
                .map(|d| format!("{}:{}:{}", d.p(), d.n1(), d.n2()))
                .collect();
            out.push(("dims_p:n1:n2".to_string(), list(cells)));
        }
        if !self.concentrations.is_empty() {
            out.push((
                "c".to_string(),
                list(self.concentrations.iter().map(f64::to_string).collect()),
            ));
        }
        if !self.deltas.is_empty() {
            out.push((
                "delta".to_string(),
                list(self.deltas.iter().map(f64::to_string).collect()),
            ));
        }
        out.push(("gamma".to_string(), self.gamma.to_string()));
        if self.kind != ExperimentKind::FigErrorAsymptotic {
            out.push(("replications".to_string(), self.replications.to_string()));
        }
        if let Some(recipe) = self.kind.recipe() {
            out.push(("recipe".to_string(), recipe.name().to_string()));
            out.push(("l".to_string(), "ones".to_string()));
            out.push(("kernel".to_string(), "epanechnikov".to_string()));
            out.push((
                "bandwidth_rule".to_string(),
                "2.345*min(sd,iqr/1.349)*n^(-1/5)".to_string(),
            ));
            out.push(("grid_points".to_string(), DEFAULT_GRID_POINTS.to_string()));
        }
        out
    }
}

/// Numeric output of an experiment plus the metadata needed to interpret
/// it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Configuration and per-cell summaries, in a fixed order.
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    fn new(columns: &[&str], metadata: Vec<(String, String)>) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

fn cell_stream(seed: u64, cell: usize) -> RngStream {
    RngStream::new(seed, (cell as u64) << CELL_SHIFT)
}

fn recipe_stream(seed: u64, cell: usize) -> RngStream {
    RngStream::new(seed, u64::MAX - cell as u64)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    match config.kind {
        ExperimentKind::FigErrorSmallDim => run_small_dim(config),
        ExperimentKind::FigErrorAsymptotic => run_asymptotic(config),
        _ => run_density(config),
    }
}

fn run_small_dim(config: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(
        &[
            "p",
            "n1",
            "n2",
            "delta",
            "er_population",
            "er_sample",
            "se",
            "er_asymptotic",
        ],
        config.describe(),
    );
    for (k, &dims) in config.dims.iter().enumerate() {
        let curve =
            ErrorRateCurve::monte_carlo(&config.deltas, dims, config.replications, cell_stream(config.seed, k))?;
        let asy = AsymptoticErParams::from_dims(dims, config.gamma)?;
        let se = curve.standard_errors.as_deref().unwrap_or_default();
        for (j, &delta) in config.deltas.iter().enumerate() {
            table.rows.push(vec![
                dims.p() as f64,
                dims.n1() as f64,
                dims.n2() as f64,
                delta,
                er_population(delta)?,
                curve.er_values[j],
                se[j],
                er_sample_asymptotic(delta, dims.p(), &asy)?,
            ]);
        }
    }
    Ok(table)
}

fn run_asymptotic(config: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(&["c", "delta", "er_population", "er_asymptotic"], config.describe());
    for &c in &config.concentrations {
        let params = AsymptoticErParams::equal_sizes(c, config.gamma)?;
        // The curve is indexed by c alone, so p^−γ is taken as 1.
        let p = 1;
        for &delta in &config.deltas {
            table.rows.push(vec![
                c,
                delta,
                er_population(delta)?,
                er_sample_asymptotic(delta, p, &params)?,
            ]);
        }
    }
    Ok(table)
}

/// Standardized coefficient draws of one density cell.
#[derive(Debug, Clone)]
pub struct DensityCell {
    pub dims: ProblemDims,
    pub params: ThetaScalarParams,
    /// Centred and scaled with the `γ = 0` variance.
    pub gamma_zero: McSample,
    /// Same draws, scaled with the `γ > 0` variance.
    pub gamma_positive: McSample,
}

impl DensityCell {
    pub fn ks_gamma_zero(&self) -> Result<f64> {
        ks_statistic(self.gamma_zero.draws(), standard_normal_cdf)
    }

    pub fn ks_gamma_positive(&self) -> Result<f64> {
        ks_statistic(self.gamma_positive.draws(), standard_normal_cdf)
    }
}

/// Draws the population of cell `cell` from `recipe`, then `b` values of
/// `θ̂ = 1ᵀâ` through the scalar representation, standardized both ways.
pub fn density_cell(
    dims: ProblemDims,
    recipe: Recipe,
    gamma: f64,
    b: usize,
    seed: u64,
    cell: usize,
) -> Result<DensityCell> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    let model = recipe_model(dims.p(), recipe, &recipe_stream(seed, cell))?;
    let ones = DVector::from_element(dims.p(), 1.0);
    let params = ThetaScalarParams::from_model(&model, &ones, dims)?;
    let raw = theta_scalar_sample(cell_stream(seed, cell), b, &params)?;
    let n = dims.n_total();
    let gamma_zero = standardize_theta(&raw, &CoefLimitParams::from_theta(&params, 0.0)?, n)?;
    let gamma_positive = standardize_theta(&raw, &CoefLimitParams::from_theta(&params, gamma)?, n)?;
    Ok(DensityCell {
        dims,
        params,
        gamma_zero,
        gamma_positive,
    })
}

fn run_density(config: &ExperimentConfig) -> Result<ResultTable> {
    let recipe = config.kind.recipe().expect("density experiment");
    let mut table = ResultTable::new(
        &["p", "n1", "n2", "x", "kde_gamma0", "kde_gamma_pos", "normal_pdf"],
        config.describe(),
    );
    for (k, &dims) in config.dims.iter().enumerate() {
        let cell = density_cell(dims, recipe, config.gamma, config.replications, config.seed, k)?;
        let zero = cell.gamma_zero.draws();
        let pos = cell.gamma_positive.draws();
        let h0 = default_bandwidth(zero)?;
        let h1 = default_bandwidth(pos)?;
        // One grid for both curves, wide enough for either sample ± 4h.
        let (lo, hi) = zero
            .iter()
            .chain(pos)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        let reach = 4.0 * h0.max(h1);
        let (lo, hi) = (lo - reach, hi + reach);
        let step = (hi - lo) / (DEFAULT_GRID_POINTS - 1) as f64;
        let xs: Vec<f64> = (0..DEFAULT_GRID_POINTS).map(|i| lo + i as f64 * step).collect();
        let kde0 = epanechnikov_kde(zero, Some(&xs), Some(h0))?;
        let kde1 = epanechnikov_kde(pos, Some(&xs), Some(h1))?;
        for (i, &x) in xs.iter().enumerate() {
            table.rows.push(vec![
                dims.p() as f64,
                dims.n1() as f64,
                dims.n2() as f64,
                x,
                kde0.density[i],
                kde1.density[i],
                normal_pdf(x),
            ]);
        }
        let prefix = format!("cell{k}");
        let meta = [
            ("delta_sq", cell.params.delta_sq()),
            ("eta", cell.params.eta),
            ("l_quad", cell.params.l_quad),
            ("bandwidth_gamma0", h0),
            ("bandwidth_gamma_pos", h1),
            ("ks_gamma0", cell.ks_gamma_zero()?),
            ("ks_gamma_pos", cell.ks_gamma_positive()?),
        ];
        for (key, value) in meta {
            table.metadata.push((format!("{prefix}.{key}"), value.to_string()));
        }
    }
    Ok(table)
}
