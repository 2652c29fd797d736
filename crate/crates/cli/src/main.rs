mod args;
mod error;
mod io;
mod svg;

use std::io::Write;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use hdlda_core::distributions::standard_normal_cdf;
use hdlda_core::error_rate::{classify, er_population, er_sample_asymptotic, AsymptoticErParams, ErrorRateCurve};
use hdlda_core::harness::experiment::DEFAULT_POSITIVE_GAMMA;
use hdlda_core::harness::{epanechnikov_kde, run_experiment, ExperimentConfig, ExperimentKind, ResultTable};
use hdlda_core::inference::{contrast_vector, one_sided_test, test_statistic, two_sided_test, TestSide};
use hdlda_core::model::{pooled_estimates, GroupSample};
use hdlda_core::oracle::plug_in_score;
use hdlda_core::representation::{d_hat_sample, DHatParams};
use hdlda_core::{Group, PooledEstimates, ProblemDims, RngStream};
use nalgebra::DVector;
use serde_json::Value;

use args::{Cli, Command, DeltaGrid, DimsArgs, Figure, Format, GlobalArgs, Side};
use error::CliError;
use svg::PlotSpec;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hdlda: {e}");
            e.exit_code()
        }
    }
}

/// What a subcommand produced.
enum Output {
    Table {
        table: ResultTable,
        plot: Option<(PlotSpec<'static>, String)>,
    },
    Json(Value),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    if let Some(threads) = g.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure worker pool: {e}")))?;
    }
    let format = g.format.unwrap_or(match cli.command {
        Command::Test { .. } => Format::Json,
        _ => Format::Csv,
    });
    if format == Format::Svg && matches!(cli.command, Command::Test { .. } | Command::Classify { .. }) {
        return Err(CliError::Usage(
            "svg output is only available for curves and densities".into(),
        ));
    }

    let output = dispatch(&cli.command, g)?;
    let mut out = io::sink(g.output.as_deref())?;
    match output {
        Output::Json(value) => io::write_json(&value, &mut out)?,
        Output::Table { mut table, plot } => {
            table.metadata.push(("format".into(), format.name().into()));
            if !g.deterministic {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
                table.metadata.push(("generated_unix".into(), secs.to_string()));
            }
            match format {
                Format::Csv => io::write_csv(&table, &mut out)?,
                Format::Json => io::write_json(&io::table_json(&table), &mut out)?,
                Format::Svg => {
                    let (spec, title) = plot.ok_or_else(|| CliError::Usage("this output has no plot".into()))?;
                    out.write_all(svg::render(&table, &spec, &title).as_bytes())?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn dims_of(d: &DimsArgs) -> Result<ProblemDims, CliError> {
    Ok(ProblemDims::new(d.p, d.n1, d.n2)?)
}

fn deltas_of(grid: &DeltaGrid, default_max: f64) -> Result<Vec<f64>, CliError> {
    let max = grid.delta_max.unwrap_or(default_max);
    let (min, step) = (grid.delta_min, grid.delta_step);
    if !(min >= 0.0 && max >= min && max.is_finite()) {
        return Err(CliError::Usage(format!(
            "need 0 ≤ --delta-min ≤ --delta-max, got {min} and {max}"
        )));
    }
    if !(step > 0.0) {
        return Err(CliError::Usage("--delta-step must be positive".into()));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return Err(CliError::Usage("Δ grid has more than 10⁵ points".into()));
    }
    Ok((0..=count).map(|k| min + k as f64 * step).collect())
}

fn side_name(side: TestSide) -> &'static str {
    match side {
        TestSide::TwoSided => "two_sided",
        TestSide::OneSided => "one_sided",
    }
}

fn meta(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn estimates(data1: &std::path::Path, data2: &std::path::Path) -> Result<PooledEstimates, CliError> {
    let x1 = GroupSample::new(io::read_matrix(data1)?, Group::First)?;
    let x2 = GroupSample::new(io::read_matrix(data2)?, Group::Second)?;
    if x1.p() != x2.p() {
        return Err(CliError::Input(format!(
            "groups have {} and {} variables",
            x1.p(),
            x2.p()
        )));
    }
    Ok(pooled_estimates(&x1, &x2)?)
}

fn dispatch(command: &Command, g: &GlobalArgs) -> Result<Output, CliError> {
    let seed = g.seed;
    match command {
        Command::ErrorRate { dims, grid, b } => {
            let d = dims_of(dims)?;
            let deltas = deltas_of(grid, 6.0)?;
            let curve = ErrorRateCurve::monte_carlo(&deltas, d, *b, RngStream::new(seed, 0))?;
            let se = curve.standard_errors.clone().unwrap_or_default();
            let mut table = ResultTable {
                columns: ["delta", "er_population", "er_sample", "se"].map(String::from).to_vec(),
                rows: Vec::new(),
                metadata: meta(&[
                    ("command", "error-rate".into()),
                    ("seed", seed.to_string()),
                    ("p", d.p().to_string()),
                    ("n1", d.n1().to_string()),
                    ("n2", d.n2().to_string()),
                    ("delta_min", grid.delta_min.to_string()),
                    ("delta_max", deltas.last().copied().unwrap_or_default().to_string()),
                    ("delta_step", grid.delta_step.to_string()),
                    ("replications", b.to_string()),
                ]),
            };
            for (k, &delta) in deltas.iter().enumerate() {
                table
                    .rows
                    .push(vec![delta, er_population(delta)?, curve.er_values[k], se[k]]);
            }
            let title = format!("error rates, p={}, n1={}, n2={}", d.p(), d.n1(), d.n2());
            let spec = PlotSpec {
                x: "delta",
                ys: &["er_population", "er_sample"],
                group_by: &[],
            };
            Ok(Output::Table {
                table,
                plot: Some((spec, title)),
            })
        }
        Command::ErrorRateAsymptotic { c, gamma, b1, p, grid } => {
            if !(*b1 > 1.0) {
                return Err(CliError::Usage("--b1 must exceed 1".into()));
            }
            let params = AsymptoticErParams::new(*gamma, *c, *b1, b1 / (b1 - 1.0))?;
            let deltas = deltas_of(grid, 100.0)?;
            let mut table = ResultTable {
                columns: ["delta", "er_population", "er_asymptotic"].map(String::from).to_vec(),
                rows: Vec::new(),
                metadata: meta(&[
                    ("command", "error-rate-asymptotic".into()),
                    ("c", c.to_string()),
                    ("gamma", gamma.to_string()),
                    ("b1", b1.to_string()),
                    ("b2", params.b2.to_string()),
                    ("p", p.to_string()),
                    ("delta_min", grid.delta_min.to_string()),
                    ("delta_max", deltas.last().copied().unwrap_or_default().to_string()),
                    ("delta_step", grid.delta_step.to_string()),
                ]),
            };
            for &delta in &deltas {
                table.rows.push(vec![
                    delta,
                    er_population(delta)?,
                    er_sample_asymptotic(delta, *p, &params)?,
                ]);
            }
            let spec = PlotSpec {
                x: "delta",
                ys: &["er_population", "er_asymptotic"],
                group_by: &[],
            };
            Ok(Output::Table {
                table,
                plot: Some((spec, format!("asymptotic error rate, c={c}"))),
            })
        }
        Command::CoefDist { dims, gamma, b } => {
            let d = dims_of(dims)?;
            if !(*gamma >= 0.0 && gamma.is_finite()) {
                return Err(CliError::Usage("--gamma must be finite and nonnegative".into()));
            }
            let (kind, positive) = if *gamma == 0.0 {
                (ExperimentKind::FigDensityGamma0, DEFAULT_POSITIVE_GAMMA)
            } else {
                (ExperimentKind::FigDensityGammaPos, *gamma)
            };
            let config = ExperimentConfig {
                kind,
                dims: vec![d],
                concentrations: Vec::new(),
                deltas: Vec::new(),
                gamma: positive,
                replications: *b,
                seed,
            };
            let mut table = run_experiment(&config)?;
            table.metadata.insert(0, ("command".into(), "coef-dist".into()));
            let spec = PlotSpec {
                x: "x",
                ys: &["kde_gamma0", "kde_gamma_pos", "normal_pdf"],
                group_by: &[],
            };
            let title = format!("standardized coefficient, p={}, n1={}, n2={}", d.p(), d.n1(), d.n2());
            Ok(Output::Table {
                table,
                plot: Some((spec, title)),
            })
        }
        Command::Test {
            data1,
            data2,
            i,
            j,
            alpha,
            side,
        } => {
            let est = estimates(data1, data2)?;
            let l = contrast_vector(est.dims().p(), *i, *j)?;
            let t = test_statistic(&est, &l)?;
            let result = match side {
                Side::Two => two_sided_test(t, est.dims(), *alpha)?,
                Side::One => one_sided_test(t, est.dims(), *alpha)?,
            };
            if g.format.unwrap_or(Format::Json) == Format::Json {
                return Ok(Output::Json(
                    serde_json::to_value(result).map_err(std::io::Error::from)?,
                ));
            }
            let table = ResultTable {
                columns: ["statistic", "dof", "p_value", "critical_value", "reject", "alpha"]
                    .map(String::from)
                    .to_vec(),
                rows: vec![vec![
                    result.statistic,
                    result.dof.as_f64(),
                    result.p_value,
                    result.critical_value,
                    f64::from(u8::from(result.reject)),
                    result.alpha,
                ]],
                metadata: meta(&[
                    ("command", "test".into()),
                    ("i", i.to_string()),
                    ("j", j.to_string()),
                    ("side", side_name(result.side).into()),
                ]),
            };
            Ok(Output::Table { table, plot: None })
        }
        Command::Classify { data1, data2, x } => {
            let est = estimates(data1, data2)?;
            let xs = io::read_matrix(x)?;
            if xs.nrows() != est.dims().p() {
                return Err(CliError::Input(format!(
                    "{}: expected {} variables, found {}",
                    x.display(),
                    est.dims().p(),
                    xs.nrows()
                )));
            }
            let mut table = ResultTable {
                columns: ["observation", "score", "group"].map(String::from).to_vec(),
                rows: Vec::new(),
                metadata: meta(&[("command", "classify".into())]),
            };
            for (k, col) in xs.column_iter().enumerate() {
                let obs = DVector::from_column_slice(col.as_slice());
                let score = plug_in_score(&est, &obs)?;
                let group = classify(&obs, &est)?;
                table.rows.push(vec![(k + 1) as f64, score, f64::from(group.index())]);
            }
            Ok(Output::Table { table, plot: None })
        }
        Command::DhatDist { dims, delta, group, b } => {
            let d = dims_of(dims)?;
            let group = Group::from_index(*group)?;
            let params = DHatParams::new(*delta, d, group)?;
            let sample = d_hat_sample(RngStream::new(seed, 0), *b, &params)?;
            let draws = sample.draws();
            let kde = epanechnikov_kde(draws, None, None)?;
            let n = draws.len() as f64;
            let mean = draws.iter().sum::<f64>() / n;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let positive = draws.iter().filter(|&&x| x > 0.0).count() as f64 / n;
            let table = ResultTable {
                columns: ["x", "density"].map(String::from).to_vec(),
                rows: kde.grid.iter().zip(&kde.density).map(|(&x, &f)| vec![x, f]).collect(),
                metadata: meta(&[
                    ("command", "dhat-dist".into()),
                    ("seed", seed.to_string()),
                    ("p", d.p().to_string()),
                    ("n1", d.n1().to_string()),
                    ("n2", d.n2().to_string()),
                    ("delta", delta.to_string()),
                    ("group", group.index().to_string()),
                    ("replications", b.to_string()),
                    ("bandwidth", kde.bandwidth.to_string()),
                    ("mean", mean.to_string()),
                    ("variance", var.to_string()),
                    ("share_positive", positive.to_string()),
                    ("er_population", standard_normal_cdf(-0.5 * delta).to_string()),
                ]),
            };
            let spec = PlotSpec {
                x: "x",
                ys: &["density"],
                group_by: &[],
            };
            Ok(Output::Table {
                table,
                plot: Some((spec, format!("plug-in score, group {}", group.index()))),
            })
        }
        Command::Reproduce { figure, b } => {
            let kind = match figure {
                Figure::Fig1 => ExperimentKind::FigErrorSmallDim,
                Figure::Fig2 => ExperimentKind::FigErrorAsymptotic,
                Figure::Fig3 => ExperimentKind::FigDensityGamma0,
                Figure::Fig4 => ExperimentKind::FigDensityGammaPos,
                Figure::Fig5 => ExperimentKind::FigDensityUnbalanced,
            };
            let mut config = ExperimentConfig::preset(kind, seed);
            if let Some(b) = b {
                config.replications = *b;
            }
            let mut table = run_experiment(&config)?;
            table
                .metadata
                .insert(0, ("command".into(), format!("reproduce {}", kind.preset_name())));
            let spec = match kind {
                ExperimentKind::FigErrorSmallDim => PlotSpec {
                    x: "delta",
                    ys: &["er_population", "er_sample"],
                    group_by: &["p", "n1"],
                },
                ExperimentKind::FigErrorAsymptotic => PlotSpec {
                    x: "delta",
                    ys: &["er_population", "er_asymptotic"],
                    group_by: &["c"],
                },
                _ => PlotSpec {
                    x: "x",
                    ys: &["kde_gamma0", "kde_gamma_pos", "normal_pdf"],
                    group_by: &["p"],
                },
            };
            Ok(Output::Table {
                table,
                plot: Some((spec, kind.name().to_string())),
            })
        }
    }
}
