//! End-to-end acceptance checks at full Monte Carlo size. Prints one
//! PASS/FAIL line per criterion and a tally. Failures make the process
//! exit nonzero only when `HDLDA_ACCEPTANCE_STRICT=1` is set, so the
//! regular test run reports them without aborting.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hdlda_core::distributions::{chi_square_cdf, sample_standard_normal, student_t_cdf, student_t_pdf, Dof};
use hdlda_core::error_rate::{
    er_population, er_raw_data_mc, er_sample_asymptotic, er_sample_mc, h_c_factor, AsymptoticErParams,
};
use hdlda_core::harness::{
    density_cell, epanechnikov_kde, ks_statistic, ks_two_sample, ks_two_sample_critical, run_experiment,
    ExperimentConfig, ExperimentKind, Recipe, KS_C_ONE_PERCENT,
};
use hdlda_core::inference::{
    contrast_vector, density_t, one_sided_test, test_statistic, two_sided_test, FTDensityParams,
};
use hdlda_core::model::projection_residual_matrix;
use hdlda_core::oracle::{brute_force_d_hat, brute_force_theta, xi_statistic, RawDataSimulator};
use hdlda_core::representation::{d_hat_sample, theta_scalar_sample, DHatParams, ThetaScalarParams};
use hdlda_core::rng::try_replicate;
use hdlda_core::{Group, PopulationModel, ProblemDims, RngStream};
use nalgebra::{DMatrix, DVector};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail_on(e: impl std::fmt::Display) -> String {
    format!("error: {e}")
}

/// Correlated, heteroscedastic covariance.
fn sigma(p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| {
        let base = 0.5f64.powi((i as i32 - j as i32).abs());
        base * (1.0 + 0.05 * i as f64).sqrt() * (1.0 + 0.05 * j as f64).sqrt()
    })
}

/// Population with covariance [`sigma`] and Mahalanobis distance `delta`.
fn model_with_delta(p: usize, delta: f64) -> PopulationModel {
    let s = sigma(p);
    let dir = DVector::from_fn(p, |i, _| 1.0 + 0.3 * (i % 4) as f64 - 0.1 * i as f64);
    let norm = dir.dot(&(s.clone().try_inverse().unwrap() * &dir)).sqrt();
    let mu2 = DVector::from_fn(p, |i, _| 0.1 * (i % 3) as f64);
    let mu1 = &mu2 + dir * (delta / norm);
    PopulationModel::new(mu1, mu2, s).unwrap()
}

fn two_sample_critical(b: usize) -> f64 {
    ks_two_sample_critical(b, b, KS_C_ONE_PERCENT)
}

fn theta_oracle() -> Outcome {
    let b = 20_000;
    let crit = two_sample_critical(b);
    let mut lines = Vec::new();
    let mut ok = true;
    for (k, (p, n1, n2)) in [(5, 25, 25), (25, 50, 50), (40, 25, 25)].into_iter().enumerate() {
        let start = Instant::now();
        let dims = ProblemDims::new(p, n1, n2).map_err(fail_on)?;
        let m = model_with_delta(p, 2.0);
        let l = DVector::from_fn(p, |i, _| if i % 2 == 0 { 1.0 } else { -0.5 });
        let params = ThetaScalarParams::from_model(&m, &l, dims).map_err(fail_on)?;
        let rep = theta_scalar_sample(RngStream::new(101, k as u64 * (1 << 32)), b, &params).map_err(fail_on)?;
        let raw = try_replicate(RngStream::new(102, k as u64 * (1 << 32)), b, |s| {
            brute_force_theta(&s, &m, &l, dims)
        })
        .map_err(fail_on)?;
        let d = ks_two_sample(rep.draws(), &raw).map_err(fail_on)?;
        let secs = start.elapsed().as_secs_f64();
        ok &= d < crit && secs <= 120.0;
        lines.push(format!("({p},{n1},{n2}) D={d:.4} {secs:.1}s"));
    }
    check(ok, format!("{}; D < {crit:.4}", lines.join(", ")))
}

fn d_hat_oracle() -> Outcome {
    let b = 20_000;
    let crit = two_sample_critical(b);
    let dims = ProblemDims::new(10, 50, 50).map_err(fail_on)?;
    let mut worst: f64 = 0.0;
    for (k, delta) in [0.0, 2.0, 4.0].into_iter().enumerate() {
        let m = model_with_delta(10, delta);
        for group in [Group::First, Group::Second] {
            let cell = (2 * k + group.index() as usize) as u64 * (1 << 32);
            let params = DHatParams::new(delta, dims, group).map_err(fail_on)?;
            let rep = d_hat_sample(RngStream::new(201, cell), b, &params).map_err(fail_on)?;
            let raw = try_replicate(RngStream::new(202, cell), b, |s| brute_force_d_hat(&s, &m, dims, group))
                .map_err(fail_on)?;
            worst = worst.max(ks_two_sample(rep.draws(), &raw).map_err(fail_on)?);
        }
    }
    check(
        worst < crit,
        format!("max D over Δ∈{{0,2,4}} × groups = {worst:.4} < {crit:.4}"),
    )
}

fn error_rate_fidelity() -> Outcome {
    let dims = ProblemDims::new(10, 100, 100).map_err(fail_on)?;
    let m = model_with_delta(10, 2.0);
    let rep = er_sample_mc(2.0, dims, 100_000, RngStream::new(301, 0)).map_err(fail_on)?;
    let raw = er_raw_data_mc(&m, dims, 100_000, RngStream::new(302, 0)).map_err(fail_on)?;
    let er_p = er_population(2.0).map_err(fail_on)?;
    let gap = (rep.value - raw.value).abs();
    check(
        gap <= 0.01 && (er_p - 0.15866).abs() <= 1e-5,
        format!(
            "ER_s rep {:.5} vs raw {:.5} (gap {gap:.5}); ER_p(2) = {er_p:.6}",
            rep.value, raw.value
        ),
    )
}

fn plug_in_dominance() -> Outcome {
    let dims: Vec<ProblemDims> = [10, 50, 75]
        .into_iter()
        .flat_map(|p| [50, 250].map(|n| ProblemDims::new(p, n, n).unwrap()))
        .collect();
    let cfg = ExperimentConfig {
        kind: ExperimentKind::FigErrorSmallDim,
        dims,
        concentrations: Vec::new(),
        deltas: (0..=6).map(f64::from).collect(),
        gamma: 0.0,
        replications: 100_000,
        seed: 401,
    };
    let t = run_experiment(&cfg).map_err(fail_on)?;
    let col = |name: &str| t.column(name).unwrap();
    let (p, n, delta, er_p, er_s, se) = (
        col("p"),
        col("n1"),
        col("delta"),
        col("er_population"),
        col("er_sample"),
        col("se"),
    );
    let violations = (0..t.rows.len()).filter(|&i| er_s[i] < er_p[i] - 3.0 * se[i]).count();
    let at = |pv: f64| {
        (0..t.rows.len())
            .find(|&i| p[i] == pv && n[i] == 50.0 && delta[i] == 3.0)
            .unwrap()
    };
    let (i10, i75) = (at(10.0), at(75.0));
    let rise = er_s[i75] - er_s[i10];
    let se_rise = (se[i10].powi(2) + se[i75].powi(2)).sqrt();
    check(
        violations == 0 && rise > 3.0 * se_rise,
        format!(
            "{violations} of {} points below ER_p − 3SE; at Δ=3, n=50: ER_s {:.4} → {:.4} (rise {:.1} SE)",
            t.rows.len(),
            er_s[i10],
            er_s[i75],
            rise / se_rise
        ),
    )
}

/// Identity covariance with `lᵀΣ⁻¹(μ₁−μ₂) = eta` for `l = e₁ − e₂`.
fn contrast_model(p: usize, eta: f64) -> PopulationModel {
    let mut mu1 = DVector::from_fn(p, |i, _| 0.3 * (i % 3) as f64);
    mu1[0] = 0.5 + eta / 2.0;
    mu1[1] = 0.5 - eta / 2.0;
    PopulationModel::new(mu1, DVector::zeros(p), DMatrix::identity(p, p)).unwrap()
}

fn simulate_t(m: &PopulationModel, dims: ProblemDims, b: usize, seed: u64) -> Result<Vec<f64>, String> {
    let l = contrast_vector(dims.p(), 1, 2).map_err(fail_on)?;
    let sim = RawDataSimulator::new(m, dims).map_err(fail_on)?;
    try_replicate(RngStream::new(seed, 0), b, |s| test_statistic(&sim.estimates(&s)?, &l)).map_err(fail_on)
}

fn null_calibration() -> Outcome {
    let dims = ProblemDims::new(10, 30, 30).map_err(fail_on)?;
    let b = 10_000;
    let ts = simulate_t(&contrast_model(10, 0.0), dims, b, 501)?;
    let dof = dims.xi_dof();
    let d = ks_statistic(&ts, |x| student_t_cdf(x, dof)).map_err(fail_on)?;
    let rejections = ts
        .iter()
        .filter(|&&t| two_sided_test(t, dims, 0.05).unwrap().reject)
        .count();
    let size = rejections as f64 / b as f64;
    check(
        d < 0.0163 && (size - 0.05).abs() <= 0.007,
        format!("KS D = {d:.4}, two-sided size = {size:.4}"),
    )
}

fn one_sided_size() -> Outcome {
    let dims = ProblemDims::new(10, 30, 30).map_err(fail_on)?;
    let b = 10_000;
    let bound = 0.05 + 3.0 * (0.05f64 * 0.95 / b as f64).sqrt();
    let mut parts = Vec::new();
    let mut ok = true;
    for (k, eta) in [-1.0, -0.5, 0.0].into_iter().enumerate() {
        let ts = simulate_t(&contrast_model(10, eta), dims, b, 601 + k as u64)?;
        let rate = ts
            .iter()
            .filter(|&&t| one_sided_test(t, dims, 0.05).unwrap().reject)
            .count() as f64
            / b as f64;
        ok &= rate <= bound;
        parts.push(format!("η={eta}: {rate:.4}"));
    }
    check(ok, format!("{} (bound {bound:.4})", parts.join(", ")))
}

fn t_density() -> Outcome {
    let dims = ProblemDims::new(10, 25, 25).map_err(fail_on)?;
    let null = FTDensityParams::new(0.0, 0.0, dims).map_err(fail_on)?;
    let mut worst_null: f64 = 0.0;
    for x in [0.0, 1.0, 2.0] {
        let f = density_t(x, &null).map_err(fail_on)?;
        worst_null = worst_null.max((f - student_t_pdf(x, dims.xi_dof())).abs());
    }
    // Σ = I, l = e₁ − e₂, μ₁ − μ₂ = (√2/2, −√2/2, √2, 0, …): lᵀΣ⁻¹l = 2,
    // η/√(lᵀΣ⁻¹l) = 1 and s = Δ² − η²/lᵀΣ⁻¹l = 3 − 1 = 2.
    let p = 10;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut mu1 = DVector::zeros(p);
    mu1[0] = h;
    mu1[1] = -h;
    mu1[2] = 2.0 * h;
    let m = PopulationModel::new(mu1, DVector::zeros(p), DMatrix::identity(p, p)).map_err(fail_on)?;
    let ts = simulate_t(&m, dims, 100_000, 701)?;
    let params = FTDensityParams::new(1.0, 2.0, dims).map_err(fail_on)?;
    let mut sorted = ts.clone();
    sorted.sort_by(f64::total_cmp);
    let points: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9]
        .iter()
        .map(|q| sorted[(q * sorted.len() as f64) as usize])
        .collect();
    let kde = epanechnikov_kde(&ts, Some(&points), None).map_err(fail_on)?;
    let se = kde.standard_errors();
    let mut worst_z: f64 = 0.0;
    for (i, &x) in points.iter().enumerate() {
        let f = density_t(x, &params).map_err(fail_on)?;
        worst_z = worst_z.max((kde.density[i] - f).abs() / se[i]);
    }
    check(
        worst_null <= 1e-8 && worst_z <= 3.0,
        format!("null |f_T − t pdf| max {worst_null:.1e}; KDE gap ≤ {worst_z:.2} SE at 5 points"),
    )
}

fn normality(kind: ExperimentKind, n1: usize, n2: usize, seed: u64) -> Outcome {
    let recipe = kind.recipe().expect("density kind");
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (k, p) in [50, 250, 400, 475].into_iter().enumerate() {
        let dims = ProblemDims::new(p, n1, n2).map_err(fail_on)?;
        let cell = density_cell(dims, recipe, 0.5, 100_000, seed, k).map_err(fail_on)?;
        let d = match recipe {
            Recipe::Sparse => cell.ks_gamma_zero(),
            Recipe::Dense => cell.ks_gamma_positive(),
        }
        .map_err(fail_on)?;
        let limit = if p == 475 { 0.08 } else { 0.05 };
        ok &= d < limit;
        // Share of the mean term in the limiting variance; near one the
        // draws inherit the skewness of (n₁+n₂−2)/ξ.
        let share = cell.params.eta.powi(2) / (cell.params.l_quad * cell.params.delta_sq());
        parts.push(format!("p={p}: D={d:.4} share={share:.2}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed <= Duration::from_secs(600);
    check(ok, format!("{} ({:.1}s)", parts.join(", "), elapsed.as_secs_f64()))
}

fn theorem_normality() -> Outcome {
    let zero = normality(ExperimentKind::FigDensityGamma0, 250, 250, 801);
    let pos = normality(ExperimentKind::FigDensityGammaPos, 250, 250, 802);
    let detail = |o: &Outcome| match o {
        Ok(s) | Err(s) => s.clone(),
    };
    check(
        zero.is_ok() && pos.is_ok(),
        format!("γ=0 recipe [{}]; γ>0 recipe [{}]", detail(&zero), detail(&pos)),
    )
}

fn unbalanced_normality() -> Outcome {
    normality(ExperimentKind::FigDensityUnbalanced, 25, 475, 901)
}

fn h_c_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in [0.1, 0.5, 0.8, 0.95] {
        let params = AsymptoticErParams::equal_sizes(c, 0.5).map_err(fail_on)?;
        for delta in [0.5, 1.0, 2.0, 5.0, 20.0] {
            let h = h_c_factor(delta, 400, c, 0.5).map_err(fail_on)?;
            worst = worst.max((h - (1.0 - c).sqrt()).abs());
            let er = er_sample_asymptotic(delta, 400, &params).map_err(fail_on)?;
            let expected = hdlda_core::distributions::standard_normal_cdf(-(1.0 - c).sqrt() * delta / 2.0);
            worst = worst.max((er - expected).abs());
        }
    }
    check(worst <= 1e-12, format!("max deviation {worst:.1e}"))
}

fn asymptotic_vs_mc() -> Outcome {
    let mut worst: f64 = 0.0;
    for (k, c) in [0.1, 0.5].into_iter().enumerate() {
        let p = (c * 1000.0) as usize;
        let dims = ProblemDims::new(p, 500, 500).map_err(fail_on)?;
        let params = AsymptoticErParams::from_dims(dims, 0.0).map_err(fail_on)?;
        for (j, delta) in [1.0, 2.0, 4.0].into_iter().enumerate() {
            let stream = RngStream::new(1101, ((3 * k + j) as u64) << 34);
            let mc = er_sample_mc(delta, dims, 100_000, stream).map_err(fail_on)?;
            let asy = er_sample_asymptotic(delta, p, &params).map_err(fail_on)?;
            worst = worst.max((mc.value - asy).abs());
        }
    }
    check(worst <= 0.02, format!("max |asymptotic − MC| = {worst:.4}"))
}

fn algebraic_invariants() -> Outcome {
    let mut rng = RngStream::new(1201, 0).rng();
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let p = 2 + k % 30;
        let a = DMatrix::from_fn(p, p, |_, _| sample_standard_normal(&mut rng));
        let s = &a * a.transpose() / p as f64 + DMatrix::identity(p, p) * 0.05;
        let s_inv = s.clone().try_inverse().ok_or("singular draw")?;
        let l = DVector::from_fn(p, |_, _| sample_standard_normal(&mut rng));
        let r = projection_residual_matrix(&s_inv, &l).map_err(fail_on)?;
        let scale = r.norm().max(1.0);
        worst = worst
            .max((&r * &s * &r - &r).norm() / scale)
            .max(((&r * &s).trace() - (p as f64 - 1.0)).abs() / p as f64)
            .max((&r * &s * &s_inv * &l).norm() / (scale * l.norm()));
    }
    let dims = ProblemDims::new(12, 20, 25).map_err(fail_on)?;
    let m = model_with_delta(12, 1.5);
    let xs = try_replicate(RngStream::new(1202, 0), 10_000, |s| xi_statistic(&s, &m, dims)).map_err(fail_on)?;
    let dof: Dof = dims.xi_dof();
    let d = ks_statistic(&xs, |x| chi_square_cdf(x, dof)).map_err(fail_on)?;
    check(
        worst <= 1e-10 && d < 0.02,
        format!("R_l identities max residual {worst:.1e}; ξ KS D = {d:.4}"),
    )
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("hdlda-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(fail_on)?;
    let run = |threads: &str, name: &str| -> Result<Vec<u8>, String> {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_hdlda"))
            .args([
                "reproduce",
                "fig1",
                "--seed",
                "42",
                "--deterministic",
                "--threads",
                threads,
                "-o",
            ])
            .arg(&path)
            .env_remove("HDLDA_SEED")
            .status()
            .map_err(fail_on)?;
        if !status.success() {
            return Err(format!("reproduce exited with {status}"));
        }
        std::fs::read(&path).map_err(fail_on)
    };
    let start = Instant::now();
    let a = run("1", "a.csv")?;
    let b = run("4", "b.csv")?;
    let _ = std::fs::remove_dir_all(&dir);
    check(
        a == b && !a.is_empty(),
        format!(
            "two runs (1 and 4 workers) byte-identical: {} ({} bytes, {:.0}s)",
            a == b,
            a.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("coefficient representation vs raw data", theta_oracle),
        ("score representation vs raw data", d_hat_oracle),
        ("error-rate fidelity", error_rate_fidelity),
        ("plug-in dominance", plug_in_dominance),
        ("null calibration of T", null_calibration),
        ("one-sided size control", one_sided_size),
        ("density of T", t_density),
        ("normality of standardized coefficient", theorem_normality),
        ("normality, unbalanced samples", unbalanced_normality),
        ("h_c closed form", h_c_closed_form),
        ("asymptotic vs Monte Carlo error rate", asymptotic_vs_mc),
        ("algebraic invariants", algebraic_invariants),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    let strict = std::env::var("HDLDA_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failures == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
