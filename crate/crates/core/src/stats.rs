//! Ordinary least squares on a single regressor.

use serde::Serialize;

/// OLS fit of `y = intercept + slope * x` with 1-sigma standard errors.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OlsFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_se: f64,
    pub slope_se: f64,
    /// Residual sum of squares.
    pub ssr: f64,
    /// Degrees of freedom, `n - 2`.
    pub dof: usize,
    pub r_squared: f64,
    pub n: usize,
}

/// Fit a straight line through `(x, y)` pairs.
///
/// Requires at least 3 points (so the residual variance has a positive
/// number of degrees of freedom) and a non-degenerate regressor.
pub fn ols(x: &[f64], y: &[f64]) -> Option<OlsFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return None;
    }
    let nf = n as f64;
    let x_mean = x.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - x_mean;
        let dy = yi - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut ssr = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - intercept - slope * xi;
        ssr += r * r;
    }
    let dof = n - 2;
    let sigma2 = ssr / dof as f64;
    let slope_se = (sigma2 / sxx).sqrt();
    let intercept_se = (sigma2 * (1.0 / nf + x_mean * x_mean / sxx)).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Some(OlsFit {
        intercept,
        slope,
        intercept_se,
        slope_se,
        ssr,
        dof,
        r_squared,
        n,
    })
}

/// OLS accumulated from running sums, for callers that scan prefix ranges
/// of a sorted dataset without materializing slices.
///
/// `sum_*` are plain sums over the n points: Σx, Σy, Σx², Σy², Σxy.
pub fn ols_from_sums(
    n: usize,
    sum_x: f64,
    sum_y: f64,
    sum_xx: f64,
    sum_yy: f64,
    sum_xy: f64,
) -> Option<OlsFit> {
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let x_mean = sum_x / nf;
    let y_mean = sum_y / nf;
    let sxx = sum_xx - nf * x_mean * x_mean;
    let syy = sum_yy - nf * y_mean * y_mean;
    let sxy = sum_xy - nf * x_mean * y_mean;
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    // Σ(y - a - bx)² expanded in the same sums; clamp tiny negative
    // cancellation residue.
    let ssr = (syy - slope * sxy).max(0.0);
    let dof = n - 2;
    let sigma2 = ssr / dof as f64;
    let slope_se = (sigma2 / sxx).sqrt();
    let intercept_se = (sigma2 * (1.0 / nf + x_mean * x_mean / sxx)).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Some(OlsFit {
        intercept,
        slope,
        intercept_se,
        slope_se,
        ssr,
        dof,
        r_squared,
        n,
    })
}
