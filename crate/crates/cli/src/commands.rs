//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use growth_cycles::data::{
    self, g17, interpolate_missing, load_table1, read_income_csv, read_year_records,
    write_income_csv, write_trajectory, write_year_records, IncomeDataset, YearField, YearRecord,
};
use growth_cycles::estimation::{
    compare_derivatives, fit_dhmp, fit_goodwin_lines, phase_centroids, DerivativeComparisonRow,
    DerivativeOrientation, DhmpFits, EstimationError, ExponentGrid, GoodwinLineFits, RateSeries,
    SegmentCentroid,
};
use growth_cycles::fit::{self, FitConfig, FitError, GpdFitReport};
use growth_cycles::goodwin::{
    integrate, orbit_period, ConditionReport, DhmpParams, DynamicsModel, GoodwinParams,
    OrbitCenter, PeriodEstimate, SimError,
};
use growth_cycles::gpd::GpdParams;

use crate::{CmdResult, Failure};

fn input_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::input(e.into())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value)
        .context("serializing report")
        .map_err(Failure::input)?;
    text.push('\n');
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::input)
}

pub fn sample(b: f64, x_t: f64, alpha: f64, count: usize, seed: u64, output: &Path) -> CmdResult {
    let params = GpdParams::new(b, x_t, alpha).map_err(input_err)?;
    let values = params.sample(count, seed);
    let ds = IncomeDataset::from_values(values).map_err(input_err)?;
    write_income_csv(output, &ds).map_err(input_err)?;
    log::info!("wrote {count} draws to {}", output.display());
    Ok(())
}

pub struct FitArgs {
    pub input: PathBuf,
    pub report: PathBuf,
    pub curve: Option<PathBuf>,
    pub normalize: bool,
    pub min_samples: usize,
    pub candidates: usize,
    pub quantile_lo: f64,
    pub quantile_hi: f64,
    pub a_bound: f64,
    pub strict_a_bound: bool,
}

#[derive(Serialize)]
struct FitReportFile<'a> {
    input: String,
    n_samples: usize,
    normalization: Option<f64>,
    config: &'a FitConfig,
    fit: &'a GpdFitReport,
}

pub fn fit_gpd(args: FitArgs) -> CmdResult {
    let ds = read_income_csv(&args.input).map_err(input_err)?;
    let ds = if args.normalize {
        ds.normalize(None).map_err(input_err)?
    } else {
        ds
    };
    let config = FitConfig {
        min_samples: args.min_samples,
        candidate_count: args.candidates,
        quantile_lo: args.quantile_lo,
        quantile_hi: args.quantile_hi,
        max_intercept_discrepancy: args.a_bound,
    };
    let report = fit::fit_gpd(ds.values(), &config).map_err(|e| match e {
        FitError::NoViableCandidate => Failure::numerical(e.into()),
        other => Failure::input(other.into()),
    })?;

    if !report.converged && args.strict_a_bound {
        return Err(Failure::numerical(anyhow!(
            "no threshold candidate met the intercept bound {} (best discrepancy {:.4})",
            args.a_bound,
            report.a_discrepancy
        )));
    }

    write_json(
        &args.report,
        &FitReportFile {
            input: args.input.display().to_string(),
            n_samples: ds.values().len(),
            normalization: ds.normalization(),
            config: &config,
            fit: &report,
        },
    )?;

    if let Some(curve_path) = &args.curve {
        write_fitted_curve(curve_path, ds.values(), &report, config.min_samples)?;
    }

    if !report.converged {
        return Err(Failure::numerical(anyhow!(
            "fit did not converge (intercept discrepancy {:.4} > bound {}); best-effort report written to {}",
            report.a_discrepancy,
            args.a_bound,
            args.report.display()
        )));
    }
    log::info!(
        "fit: B = {:.4}, x_t = {:.3}, alpha = {:.3}",
        report.b,
        report.x_t,
        report.alpha
    );
    Ok(())
}

/// Empirical and fitted complementary distribution side by side,
/// downsampled to at most ~20k rows.
fn write_fitted_curve(
    path: &Path,
    values: &[f64],
    report: &GpdFitReport,
    min_samples: usize,
) -> CmdResult {
    let ccdf = fit::EmpiricalCcdf::from_samples(values, min_samples).map_err(input_err)?;
    let stride = ccdf.len().div_ceil(20_000).max(1);
    let fitted = |x: f64| -> f64 {
        if x < report.x_t {
            (report.a_hat - report.b * x).exp().exp()
        } else {
            (report.pareto_intercept - report.alpha * x.ln()).exp()
        }
    };
    let mut out = String::from("x,empirical_F,fitted_F\n");
    for (i, (x, f)) in ccdf.points().enumerate() {
        if i % stride == 0 {
            writeln!(out, "{},{},{}", g17(x), g17(f), g17(fitted(x))).unwrap();
        }
    }
    std::fs::write(path, out)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::input)
}

fn load_table(path: Option<&Path>) -> Result<Vec<YearRecord>, Failure> {
    match path {
        Some(p) => read_year_records(p).map_err(input_err),
        None => Ok(load_table1()),
    }
}

pub fn evaluate(table: Option<&Path>, output: &Path) -> CmdResult {
    let records = load_table(table)?;
    let mut out = String::from(
        "year,u_model,u_raw,u_gap,gini_model,gini_raw,gini_gap,V_model,V_raw,V_gap\n",
    );
    let fmt_pair = |model: Option<f64>, raw: Option<f64>| -> String {
        let gap = match (model, raw) {
            (Some(m), Some(r)) if r != 0.0 => Some((m - r) / r),
            _ => None,
        };
        format!(
            "{},{},{}",
            model.map(g17).unwrap_or_default(),
            raw.map(g17).unwrap_or_default(),
            gap.map(g17).unwrap_or_default()
        )
    };
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for r in &records {
        if !r.has_gpd_params() {
            log::warn!("year {}: no distribution parameters, row skipped", r.year);
            skipped += 1;
            continue;
        }
        let params =
            GpdParams::new(r.b.unwrap(), r.x_t.unwrap(), r.alpha.unwrap()).map_err(input_err)?;
        let u_model = params.labor_share().ok().map(|p| p.value());
        let gini_model = params.gini().ok();
        let v_model = r
            .x_d
            .and_then(|x_d| params.unemployment_share(x_d).ok())
            .map(|p| p.value());
        writeln!(
            out,
            "{},{},{},{}",
            r.year,
            fmt_pair(u_model, r.labor_share),
            fmt_pair(gini_model, r.gini),
            fmt_pair(v_model, r.unemployment),
        )
        .unwrap();
        evaluated += 1;
    }
    std::fs::write(output, out)
        .with_context(|| format!("writing {}", output.display()))
        .map_err(Failure::input)?;
    log::info!("evaluated {evaluated} rows, skipped {skipped}");
    Ok(())
}

pub struct SimulateArgs {
    /// False for the original model, true for the bounded extension.
    pub model: bool,
    pub params_file: Option<PathBuf>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub delta: Option<f64>,
    pub u_bar: Option<f64>,
    pub u0: f64,
    pub v0: f64,
    pub t_end: f64,
    pub step: f64,
    pub stride: usize,
    pub trajectory: PathBuf,
    pub report: PathBuf,
}

#[derive(Deserialize)]
struct ParamsFile {
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    delta: Option<f64>,
    u_bar: Option<f64>,
}

#[derive(Serialize)]
struct SimReportFile {
    model: &'static str,
    params: DynamicsModel,
    initial: (f64, f64),
    t_end: f64,
    step: f64,
    /// Original model only: orbit center and small-amplitude period.
    center: Option<OrbitCenter>,
    center_error: Option<String>,
    /// Bounded model only: interior stationary state.
    fixed_point: Option<(f64, f64)>,
    fixed_point_error: Option<String>,
    detected_period: Option<PeriodEstimate>,
    period_error: Option<String>,
    conserved_drift: Option<f64>,
    domain_excursion: bool,
    exit: Option<growth_cycles::goodwin::DomainExit>,
    points_written: usize,
    conditions: ConditionReport,
}

pub fn simulate(args: SimulateArgs) -> CmdResult {
    let file_params: Option<ParamsFile> = match &args.params_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::input)?;
            Some(
                serde_json::from_str(&text)
                    .context("parsing params file")
                    .map_err(Failure::input)?,
            )
        }
        None => None,
    };
    let grouped = |flag: Option<f64>, from_file: Option<f64>, name: &str| -> Result<f64, Failure> {
        from_file.or(flag).ok_or_else(|| {
            Failure::input(anyhow!("missing constant {name}: pass --{name} or --params-file"))
        })
    };
    let (a1, a2, b1, b2) = (
        grouped(args.a1, file_params.as_ref().map(|p| p.a1), "a1")?,
        grouped(args.a2, file_params.as_ref().map(|p| p.a2), "a2")?,
        grouped(args.b1, file_params.as_ref().map(|p| p.b1), "b1")?,
        grouped(args.b2, file_params.as_ref().map(|p| p.b2), "b2")?,
    );

    let (model, model_name, conditions) = if args.model {
        let delta = args
            .delta
            .or(file_params.as_ref().and_then(|p| p.delta))
            .ok_or_else(|| Failure::input(anyhow!("the bounded model needs --delta")))?;
        let u_bar = args
            .u_bar
            .or(file_params.as_ref().and_then(|p| p.u_bar))
            .unwrap_or(95.0);
        let params = DhmpParams::from_grouped(a1, a2, b1, b2, delta, u_bar).map_err(input_err)?;
        let conditions = params.conditions(None);
        (DynamicsModel::Dhmp(params), "dhmp", conditions)
    } else {
        let params = GoodwinParams::from_grouped(a1, a2, b1, b2);
        let conditions = params.conditions();
        (DynamicsModel::Goodwin(params), "goodwin", conditions)
    };

    let traj = integrate(&model, (args.u0, args.v0), args.t_end, args.step).map_err(|e| match e {
        SimError::InvalidStep { .. } | SimError::InvalidTimeSpan { .. } => Failure::input(e.into()),
        other => Failure::numerical(other.into()),
    })?;

    let (center, center_error, fixed_point, fixed_point_error) = match &model {
        DynamicsModel::Goodwin(p) => match p.center() {
            Ok(c) => (Some(c), None, None, None),
            Err(e) => (None, Some(e.to_string()), None, None),
        },
        DynamicsModel::Dhmp(p) => match p.fixed_point() {
            Ok(fp) => (None, None, Some(fp), None),
            Err(e) => (None, None, None, Some(e.to_string())),
        },
    };
    let (detected_period, period_error) = match orbit_period(&traj) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };

    // Thin the exported points but keep the final state.
    let mut thinned = traj.clone();
    if args.stride > 1 {
        let last = *traj.points.last().unwrap();
        thinned.points = traj
            .points
            .iter()
            .copied()
            .step_by(args.stride)
            .collect();
        if thinned.points.last() != Some(&last) {
            thinned.points.push(last);
        }
    }
    write_trajectory(&args.trajectory, &thinned).map_err(input_err)?;

    let exit = traj.exit;
    write_json(
        &args.report,
        &SimReportFile {
            model: model_name,
            params: model,
            initial: (args.u0, args.v0),
            t_end: args.t_end,
            step: args.step,
            center,
            center_error,
            fixed_point,
            fixed_point_error,
            detected_period,
            period_error,
            conserved_drift: traj.conserved_drift,
            domain_excursion: traj.domain_excursion,
            exit,
            points_written: thinned.points.len(),
            conditions,
        },
    )?;

    if let Some(exit) = exit {
        return Err(Failure::numerical(anyhow!(
            "trajectory left the model domain at t = {} ({:?}); truncated output written",
            exit.t,
            exit.reason
        )));
    }
    Ok(())
}

pub struct EstimateArgs {
    pub table: Option<PathBuf>,
    pub u_bar: f64,
    pub reversed: bool,
    pub exclude_interpolated: bool,
    pub split_year: i32,
    pub delta_max: f64,
    pub delta_step: f64,
    pub output_dir: PathBuf,
}

#[derive(Serialize)]
struct EstimateReportFile {
    orientation: DerivativeOrientation,
    exclude_interpolated: bool,
    goodwin: GoodwinLineFits,
    goodwin_center: Option<OrbitCenter>,
    goodwin_conditions: ConditionReport,
    dhmp: DhmpFits,
    dhmp_conditions: ConditionReport,
    centroids: Vec<SegmentCentroid>,
    derivative_comparison: Vec<DerivativeComparisonRow>,
}

pub fn estimate(args: EstimateArgs) -> CmdResult {
    let records = load_table(args.table.as_deref())?;
    let points = data::uv_points(&records).map_err(input_err)?;
    let orientation = if args.reversed {
        DerivativeOrientation::Reversed
    } else {
        DerivativeOrientation::Forward
    };
    let rates = RateSeries::from_uv(&points, orientation).map_err(input_err)?;

    let map_est = |e: EstimationError| match e {
        EstimationError::Degenerate(_) | EstimationError::Sim(_) => Failure::numerical(e.into()),
        other => Failure::input(other.into()),
    };
    let goodwin = fit_goodwin_lines(&rates, args.exclude_interpolated).map_err(map_est)?;
    let grid = ExponentGrid {
        max: args.delta_max,
        step: args.delta_step,
    };
    let dhmp = fit_dhmp(&rates, args.u_bar, args.exclude_interpolated, grid).map_err(map_est)?;

    let first_year = points.first().map(|p| p.year).unwrap_or(args.split_year);
    let last_year = points.last().map(|p| p.year).unwrap_or(args.split_year);
    let centroids = phase_centroids(
        &points,
        &[
            (first_year, args.split_year),
            (args.split_year + 1, last_year),
        ],
    )
    .map_err(map_est)?;

    let du_printed: Vec<Option<f64>> = records.iter().map(|r| r.du_printed).collect();
    let dv_printed: Vec<Option<f64>> = records.iter().map(|r| r.dv_printed).collect();
    let comparison = compare_derivatives(&points, &du_printed, &dv_printed).map_err(map_est)?;

    std::fs::create_dir_all(&args.output_dir)
        .with_context(|| format!("creating {}", args.output_dir.display()))
        .map_err(Failure::input)?;

    let goodwin_center = goodwin.params.center().ok();
    let goodwin_conditions = goodwin.params.conditions();
    let dhmp_conditions = dhmp.params.conditions(Some(&dhmp.uncertainty));
    write_json(
        &args.output_dir.join("report.json"),
        &EstimateReportFile {
            orientation,
            exclude_interpolated: args.exclude_interpolated,
            goodwin,
            goodwin_center,
            goodwin_conditions,
            dhmp,
            dhmp_conditions,
            centroids,
            derivative_comparison: comparison,
        },
    )?;

    // Time series (year, u, v) and labeled phase-space points.
    let mut series = String::from("year,u,v\n");
    for p in &points {
        writeln!(series, "{},{},{}", p.year, g17(p.u), g17(p.v)).unwrap();
    }
    std::fs::write(args.output_dir.join("series.csv"), series)
        .context("writing series.csv")
        .map_err(Failure::input)?;

    let mut phase = String::from("label,year,u,v\n");
    for (i, p) in points.iter().enumerate() {
        writeln!(phase, "{},{},{},{}", i + 1, p.year, g17(p.u), g17(p.v)).unwrap();
    }
    std::fs::write(args.output_dir.join("phase.csv"), phase)
        .context("writing phase.csv")
        .map_err(Failure::input)?;

    log::info!(
        "estimation written to {} (report.json, series.csv, phase.csv)",
        args.output_dir.display()
    );
    Ok(())
}

pub fn table1(output: &Path, interpolate: bool) -> CmdResult {
    let mut records = load_table1();
    if interpolate {
        records = interpolate_missing(&records, &YearField::GPD_FIELDS).map_err(input_err)?;
    }
    write_year_records(output, &records).map_err(input_err)?;
    Ok(())
}
