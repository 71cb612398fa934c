//! Growth-rate estimation from yearly series.
//!
//! A yearly `(u, v)` table becomes growth-rate observations via central
//! differences at unit spacing, after which the model equations reduce to
//! regressions:
//!
//! - the original model is linear in both directions (`du/u` on `v`,
//!   `dv/v` on `u`);
//! - the extended model needs a three-parameter power-law fit of `du/u`
//!   against the unemployment rate and a log regression of `dv/v` on
//!   `ln(u_bar - u)`.
//!
//! The nonlinear fit is solved by an exhaustive grid over the exponent with
//! closed-form inner OLS, refined by Gauss-Newton from the grid optimum; its
//! objective is nearly flat in the exponent for the bundled data, which the
//! reported uncertainties make visible.

use serde::Serialize;
use thiserror::Error;

use crate::goodwin::{DhmpParams, DhmpUncertainty, GoodwinParams, SimError};
use crate::stats::{ols, OlsFit};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("yearly series has gaps; missing years {0:?} must be interpolated first")]
    MissingYears(Vec<i32>),
    #[error("need at least {need} usable points, got {have}")]
    InsufficientPoints { have: usize, need: usize },
    #[error("u_bar = {u_bar} must exceed every observed labor share (max {max_u})")]
    UBarNotAboveShares { u_bar: f64, max_u: f64 },
    #[error("segment {start}..={end} contains no points")]
    EmptySegment { start: i32, end: i32 },
    #[error("segments overlap")]
    OverlappingSegments,
    #[error("input slices have mismatched lengths")]
    LengthMismatch,
    #[error("regression is numerically degenerate: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Fewest regression points any fit here will accept.
pub const MIN_FIT_POINTS: usize = 5;

/// Sign convention for the yearly derivative.
///
/// `Forward` is the plain central difference `(f(t+1) - f(t-1)) / 2`.
/// `Reversed` negates it, i.e. differences the series as if the year column
/// ran backwards. The printed derivative columns of the bundled 1981-2009
/// table (and therefore the regression results published alongside it)
/// follow the reversed convention, so that is the default for reproducing
/// them; see the derivative comparison report for the evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum DerivativeOrientation {
    Forward,
    #[default]
    Reversed,
}

/// Central difference at unit spacing for a gap-free yearly series.
/// Endpoints carry no derivative. Gaps are an error naming the missing
/// years; interpolate first.
pub fn central_difference(
    years: &[i32],
    values: &[f64],
) -> Result<Vec<Option<f64>>, EstimationError> {
    if years.len() != values.len() {
        return Err(EstimationError::LengthMismatch);
    }
    if years.len() < 3 {
        return Err(EstimationError::InsufficientPoints {
            have: years.len(),
            need: 3,
        });
    }
    let missing: Vec<i32> = years
        .windows(2)
        .flat_map(|w| (w[0] + 1)..w[1])
        .collect();
    if !missing.is_empty() {
        return Err(EstimationError::MissingYears(missing));
    }
    let n = values.len();
    let mut out = vec![None; n];
    for i in 1..n - 1 {
        out[i] = Some((values[i + 1] - values[i - 1]) / 2.0);
    }
    Ok(out)
}

/// One year of the input table, with a flag for rows whose distribution
/// parameters were interpolated rather than sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UvPoint {
    pub year: i32,
    pub u: f64,
    pub v: f64,
    pub interpolated: bool,
}

/// Yearly states with their growth rates.
#[derive(Debug, Clone, Serialize)]
pub struct RateEntry {
    pub year: i32,
    pub u: f64,
    pub v: f64,
    pub du: Option<f64>,
    pub dv: Option<f64>,
    pub interpolated: bool,
}

impl RateEntry {
    pub fn du_over_u(&self) -> Option<f64> {
        self.du.map(|d| d / self.u)
    }

    pub fn dv_over_v(&self) -> Option<f64> {
        self.dv.map(|d| d / self.v)
    }
}

/// A yearly series with derivatives attached.
#[derive(Debug, Clone, Serialize)]
pub struct RateSeries {
    pub orientation: DerivativeOrientation,
    entries: Vec<RateEntry>,
}

impl RateSeries {
    pub fn from_uv(
        points: &[UvPoint],
        orientation: DerivativeOrientation,
    ) -> Result<Self, EstimationError> {
        let years: Vec<i32> = points.iter().map(|p| p.year).collect();
        let us: Vec<f64> = points.iter().map(|p| p.u).collect();
        let vs: Vec<f64> = points.iter().map(|p| p.v).collect();
        let mut du = central_difference(&years, &us)?;
        let mut dv = central_difference(&years, &vs)?;
        if orientation == DerivativeOrientation::Reversed {
            for d in du.iter_mut().chain(dv.iter_mut()) {
                *d = d.map(|x| -x);
            }
        }
        let entries = points
            .iter()
            .zip(du.into_iter().zip(dv))
            .map(|(p, (du, dv))| RateEntry {
                year: p.year,
                u: p.u,
                v: p.v,
                du,
                dv,
                interpolated: p.interpolated,
            })
            .collect();
        Ok(Self {
            orientation,
            entries,
        })
    }

    pub fn entries(&self) -> &[RateEntry] {
        &self.entries
    }

    /// Entries usable as regression points: both derivatives defined, and
    /// optionally with interpolated rows dropped.
    fn regression_entries(&self, exclude_interpolated: bool) -> Vec<&RateEntry> {
        self.entries
            .iter()
            .filter(|e| e.du.is_some() && e.dv.is_some())
            .filter(|e| !(exclude_interpolated && e.interpolated))
            .collect()
    }
}

/// Named coefficient with its 1-sigma standard error.
#[derive(Debug, Clone, Serialize)]
pub struct Coefficient {
    pub name: &'static str,
    pub value: f64,
    pub std_err: f64,
}

/// A fitted regression: coefficients, residual sum of squares, degrees of
/// freedom and coefficient of determination.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub coefficients: Vec<Coefficient>,
    pub ssr: f64,
    pub dof: usize,
    pub r_squared: f64,
    pub n_points: usize,
}

impl FitResult {
    fn from_ols(fit: &OlsFit) -> Self {
        Self {
            coefficients: vec![
                Coefficient {
                    name: "intercept",
                    value: fit.intercept,
                    std_err: fit.intercept_se,
                },
                Coefficient {
                    name: "slope",
                    value: fit.slope,
                    std_err: fit.slope_se,
                },
            ],
            ssr: fit.ssr,
            dof: fit.dof,
            r_squared: fit.r_squared,
            n_points: fit.n,
        }
    }

    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// The two linear fits of the original model and the constants they map to.
#[derive(Debug, Clone, Serialize)]
pub struct GoodwinLineFits {
    /// `du/u = intercept + slope * v`.
    pub wage: FitResult,
    /// `dv/v = intercept + slope * u`.
    pub employment: FitResult,
    /// Grouped constants via `a1 = -intercept_w`, `b1 = slope_w`,
    /// `a2 = intercept_e`, `b2 = -slope_e`.
    pub params: GoodwinParams,
}

/// Fit both straight lines of the original model.
pub fn fit_goodwin_lines(
    rates: &RateSeries,
    exclude_interpolated: bool,
) -> Result<GoodwinLineFits, EstimationError> {
    let pts = rates.regression_entries(exclude_interpolated);
    if pts.len() < MIN_FIT_POINTS {
        return Err(EstimationError::InsufficientPoints {
            have: pts.len(),
            need: MIN_FIT_POINTS,
        });
    }
    let v: Vec<f64> = pts.iter().map(|e| e.v).collect();
    let u: Vec<f64> = pts.iter().map(|e| e.u).collect();
    let wage_rates: Vec<f64> = pts.iter().map(|e| e.du_over_u().unwrap()).collect();
    let employment_rates: Vec<f64> = pts.iter().map(|e| e.dv_over_v().unwrap()).collect();
    let wage = ols(&v, &wage_rates)
        .ok_or_else(|| EstimationError::Degenerate("wage regression".into()))?;
    let employment = ols(&u, &employment_rates)
        .ok_or_else(|| EstimationError::Degenerate("employment regression".into()))?;
    let params = GoodwinParams::from_grouped(
        -wage.intercept,
        employment.intercept,
        wage.slope,
        -employment.slope,
    );
    Ok(GoodwinLineFits {
        wage: FitResult::from_ols(&wage),
        employment: FitResult::from_ols(&employment),
        params,
    })
}

/// The power-law and log fits of the extended model.
#[derive(Debug, Clone, Serialize)]
pub struct DhmpFits {
    /// `du/u = offset + scale * V^exponent`, `V = 100 - v`.
    pub wage_power: FitResult,
    /// `dv/v = intercept + slope * ln(u_bar - u)`.
    pub employment_log: FitResult,
    /// Exponent selected by the grid stage, before refinement.
    pub grid_exponent: f64,
    pub u_bar: f64,
    /// Grouped constants via `a1 = -offset`, `b1 = scale`,
    /// `a2 = -intercept_log`, `b2 = slope_log`, `delta = exponent`.
    pub params: DhmpParams,
    pub uncertainty: DhmpUncertainty,
}

/// Exponent grid: (0, `max`] at the given resolution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentGrid {
    pub max: f64,
    pub step: f64,
}

impl Default for ExponentGrid {
    fn default() -> Self {
        Self { max: 5.0, step: 0.01 }
    }
}

/// Fit both equations of the extended model. `u_bar` must exceed every
/// observed labor share or the log regressor is undefined.
pub fn fit_dhmp(
    rates: &RateSeries,
    u_bar: f64,
    exclude_interpolated: bool,
    grid: ExponentGrid,
) -> Result<DhmpFits, EstimationError> {
    let pts = rates.regression_entries(exclude_interpolated);
    if pts.len() < MIN_FIT_POINTS {
        return Err(EstimationError::InsufficientPoints {
            have: pts.len(),
            need: MIN_FIT_POINTS,
        });
    }
    let max_u = pts.iter().map(|e| e.u).fold(f64::MIN, f64::max);
    if u_bar <= max_u {
        return Err(EstimationError::UBarNotAboveShares { u_bar, max_u });
    }

    let unemployment: Vec<f64> = pts.iter().map(|e| 100.0 - e.v).collect();
    let wage_rates: Vec<f64> = pts.iter().map(|e| e.du_over_u().unwrap()).collect();
    let log_slack: Vec<f64> = pts.iter().map(|e| (u_bar - e.u).ln()).collect();
    let employment_rates: Vec<f64> = pts.iter().map(|e| e.dv_over_v().unwrap()).collect();

    let employment = ols(&log_slack, &employment_rates)
        .ok_or_else(|| EstimationError::Degenerate("log regression".into()))?;
    let power = fit_power_law(&unemployment, &wage_rates, grid)?;

    let params = DhmpParams::from_grouped(
        -power.offset,
        -employment.intercept,
        power.scale,
        employment.slope,
        power.exponent,
        u_bar,
    )?;
    let uncertainty = DhmpUncertainty {
        a1_se: Some(power.offset_se),
        a2_se: Some(employment.intercept_se),
        b1_se: Some(power.scale_se),
        b2_se: Some(employment.slope_se),
        delta_se: Some(power.exponent_se),
    };
    let n = wage_rates.len();
    Ok(DhmpFits {
        wage_power: FitResult {
            coefficients: vec![
                Coefficient {
                    name: "offset",
                    value: power.offset,
                    std_err: power.offset_se,
                },
                Coefficient {
                    name: "scale",
                    value: power.scale,
                    std_err: power.scale_se,
                },
                Coefficient {
                    name: "exponent",
                    value: power.exponent,
                    std_err: power.exponent_se,
                },
            ],
            ssr: power.ssr,
            dof: n - 3,
            r_squared: power.r_squared,
            n_points: n,
        },
        employment_log: FitResult::from_ols(&employment),
        grid_exponent: power.grid_exponent,
        u_bar,
        params,
        uncertainty,
    })
}

struct PowerLawFit {
    offset: f64,
    scale: f64,
    exponent: f64,
    offset_se: f64,
    scale_se: f64,
    exponent_se: f64,
    ssr: f64,
    r_squared: f64,
    grid_exponent: f64,
}

/// Closed-form OLS of `y` on `x^delta`; the inner solver of the grid stage.
fn ols_at_exponent(x: &[f64], y: &[f64], delta: f64) -> Option<OlsFit> {
    let regressor: Vec<f64> = x.iter().map(|&v| v.powf(delta)).collect();
    ols(&regressor, y)
}

/// Minimize `sum (offset + scale x^exponent - y)^2` by an exponent grid with
/// inner OLS, then Gauss-Newton from the grid optimum. Ties in the grid
/// stage go to the smaller exponent.
fn fit_power_law(x: &[f64], y: &[f64], grid: ExponentGrid) -> Result<PowerLawFit, EstimationError> {
    let n = x.len();
    if n < 4 {
        return Err(EstimationError::InsufficientPoints { have: n, need: 4 });
    }
    let steps = (grid.max / grid.step).round() as usize;
    let mut best: Option<(f64, f64, f64, f64)> = None; // ssr, delta, offset, scale
    for i in 1..=steps {
        let delta = i as f64 * grid.step;
        if let Some(fit) = ols_at_exponent(x, y, delta) {
            let better = match best {
                None => true,
                Some((ssr, ..)) => fit.ssr < ssr,
            };
            if better {
                best = Some((fit.ssr, delta, fit.intercept, fit.slope));
            }
        }
    }
    let (_, grid_delta, offset0, scale0) =
        best.ok_or_else(|| EstimationError::Degenerate("exponent grid".into()))?;

    let (params, ssr) = gauss_newton(x, y, [offset0, scale0, grid_delta])?;
    let [offset, scale, exponent] = params;

    // Covariance from the Jacobian at the optimum: sigma^2 (J^T J)^-1.
    let jtj = normal_matrix(x, scale, exponent);
    let cov_scale = ssr / (n - 3) as f64;
    let inv = invert_3x3(&jtj)
        .ok_or_else(|| EstimationError::Degenerate("singular normal matrix".into()))?;
    let se = |i: usize| (cov_scale * inv[i][i]).sqrt();

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let syy: f64 = y.iter().map(|&v| (v - y_mean) * (v - y_mean)).sum();
    Ok(PowerLawFit {
        offset,
        scale,
        exponent,
        offset_se: se(0),
        scale_se: se(1),
        exponent_se: se(2),
        ssr,
        r_squared: if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 },
        grid_exponent: grid_delta,
    })
}

fn residual_ssr(x: &[f64], y: &[f64], p: &[f64; 3]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = p[0] + p[1] * xi.powf(p[2]) - yi;
            r * r
        })
        .sum()
}

fn normal_matrix(x: &[f64], scale: f64, exponent: f64) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for &xi in x {
        let pw = xi.powf(exponent);
        let j = [1.0, pw, scale * pw * xi.ln()];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += j[r] * j[c];
            }
        }
    }
    m
}

/// Gauss-Newton with step halving; assumes the start is near the optimum
/// (it comes from the grid stage).
fn gauss_newton(x: &[f64], y: &[f64], start: [f64; 3]) -> Result<([f64; 3], f64), EstimationError> {
    let mut p = start;
    let mut ssr = residual_ssr(x, y, &p);
    for _ in 0..200 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&xi, &yi) in x.iter().zip(y) {
            let pw = xi.powf(p[2]);
            let j = [1.0, pw, p[1] * pw * xi.ln()];
            let r = p[0] + p[1] * pw - yi;
            for a in 0..3 {
                jtr[a] += j[a] * r;
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let delta = solve_3x3(&jtj, &[-jtr[0], -jtr[1], -jtr[2]])
            .ok_or_else(|| EstimationError::Degenerate("singular Gauss-Newton step".into()))?;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial = [
                p[0] + lambda * delta[0],
                p[1] + lambda * delta[1],
                p[2] + lambda * delta[2],
            ];
            let trial_ssr = residual_ssr(x, y, &trial);
            if trial_ssr <= ssr {
                improved = trial_ssr < ssr * (1.0 - 1e-14);
                p = trial;
                ssr = trial_ssr;
                break;
            }
            lambda *= 0.5;
        }
        let step_norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt() * lambda;
        if !improved || step_norm < 1e-13 {
            break;
        }
    }
    Ok((p, ssr))
}

#[allow(clippy::needless_range_loop)]
fn solve_3x3(m: &[[f64; 3]; 3], rhs: &[f64; 3]) -> Option<[f64; 3]> {
    let inv = invert_3x3(m)?;
    let mut out = [0.0; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r] += inv[r][c] * rhs[c];
        }
    }
    Some(out)
}

#[allow(clippy::needless_range_loop)]
fn invert_3x3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let sub: Vec<f64> = (0..3)
                .filter(|&i| i != c)
                .flat_map(|i| (0..3).filter(|&j| j != r).map(move |j| (i, j)))
                .map(|(i, j)| m[i][j])
                .collect();
            let minor = sub[0] * sub[3] - sub[1] * sub[2];
            let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
            inv[r][c] = sign * minor / det;
        }
    }
    Some(inv)
}

/// Arithmetic mean state of a year segment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SegmentCentroid {
    pub start: i32,
    pub end: i32,
    pub u: f64,
    pub v: f64,
    pub n_points: usize,
}

/// Mean `(u, v)` per non-overlapping year range.
pub fn phase_centroids(
    points: &[UvPoint],
    segments: &[(i32, i32)],
) -> Result<Vec<SegmentCentroid>, EstimationError> {
    for (i, a) in segments.iter().enumerate() {
        for b in &segments[i + 1..] {
            if a.0 <= b.1 && b.0 <= a.1 {
                return Err(EstimationError::OverlappingSegments);
            }
        }
    }
    segments
        .iter()
        .map(|&(start, end)| {
            let members: Vec<&UvPoint> = points
                .iter()
                .filter(|p| (start..=end).contains(&p.year))
                .collect();
            if members.is_empty() {
                return Err(EstimationError::EmptySegment { start, end });
            }
            let n = members.len() as f64;
            Ok(SegmentCentroid {
                start,
                end,
                u: members.iter().map(|p| p.u).sum::<f64>() / n,
                v: members.iter().map(|p| p.v).sum::<f64>() / n,
                n_points: members.len(),
            })
        })
        .collect()
}

/// One row of the derivative-comparison report: the literal central
/// difference recomputed from the series against the table's printed value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivativeComparisonRow {
    pub year: i32,
    pub du_recomputed: Option<f64>,
    pub du_printed: Option<f64>,
    pub dv_recomputed: Option<f64>,
    pub dv_printed: Option<f64>,
}

impl DerivativeComparisonRow {
    /// Largest absolute disagreement between a recomputed and printed pair.
    pub fn max_mismatch(&self) -> Option<f64> {
        let d1 = match (self.du_recomputed, self.du_printed) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        let d2 = match (self.dv_recomputed, self.dv_printed) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        match (d1, d2) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
    }
}

/// Recompute forward central differences and line them up with printed
/// derivative columns. Purely a report; nothing is gated on agreement.
pub fn compare_derivatives(
    points: &[UvPoint],
    du_printed: &[Option<f64>],
    dv_printed: &[Option<f64>],
) -> Result<Vec<DerivativeComparisonRow>, EstimationError> {
    if points.len() != du_printed.len() || points.len() != dv_printed.len() {
        return Err(EstimationError::LengthMismatch);
    }
    let series = RateSeries::from_uv(points, DerivativeOrientation::Forward)?;
    Ok(series
        .entries()
        .iter()
        .zip(du_printed.iter().zip(dv_printed))
        .map(|(e, (&dup, &dvp))| DerivativeComparisonRow {
            year: e.year,
            du_recomputed: e.du,
            du_printed: dup,
            dv_recomputed: e.dv,
            dv_printed: dvp,
        })
        .collect())
}
