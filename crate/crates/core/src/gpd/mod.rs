//! The two-branch Gompertz-Pareto income distribution.
//!
//! The complementary cumulative distribution `F(x)` (percent of individuals
//! with income at least `x`, on the 0-100 scale) is a Gompertz curve
//! `exp(exp(A - Bx))` below the threshold `x_t` and a Pareto power law
//! `(x_t/x)^alpha * F(x_t)` above it. The intercept `A = ln(ln 100)` is fixed
//! by the boundary condition `F(0) = 100`, and the Pareto normalization is
//! fixed by continuity at `x_t`, so three parameters `(B, x_t, alpha)` fully
//! characterize the distribution.
//!
//! Incomes are normalized (nominal values divided by a reference average),
//! so every quantity here is currency-free.

mod sample;

use serde::Serialize;
use thiserror::Error;

use crate::quad;

/// Intercept of the linearized Gompertz branch, `ln(ln 100)`.
///
/// Fixed by the boundary condition `F(0) = 100`; stored at full floating
/// precision rather than the 4-digit rounding 1.5272.
pub const GOMPERTZ_INTERCEPT: f64 = 1.527_179_625_807_901_1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpdError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("income must be non-negative, got {x}")]
    NegativeIncome { x: f64 },
    #[error("mean income diverges unless alpha > 1, got alpha = {alpha}")]
    DivergentMean { alpha: f64 },
    #[error("partial moment is defined on [0, x_t = {x_t}], got x = {x}")]
    OutsideGompertzRegion { x: f64, x_t: f64 },
    #[error("unemployment threshold must satisfy x_d < x_t = {x_t}, got x_d = {x_d}")]
    ThresholdNotBelowCutoff { x_d: f64, x_t: f64 },
    #[error("percent value must lie in [0, 100], got {value}")]
    PercentOutOfRange { value: f64 },
    #[error("share ratio {ratio} falls outside (0, 1): no positive Pareto index matches")]
    InfeasibleShareRatio { ratio: f64 },
    #[error("labor share {share} falls outside (0, 100): infeasible parameters")]
    InfeasibleLaborShare { share: f64 },
    #[error("quantile level must lie in (0, 100], got {q}")]
    QuantileOutOfRange { q: f64 },
}

/// A probability or share on the 0-100 scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Percent(f64);

impl Percent {
    pub fn new(value: f64) -> Result<Self, GpdError> {
        if !(0.0..=100.0).contains(&value) {
            return Err(GpdError::PercentOutOfRange { value });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Wrap a value that is mathematically inside [0, 100] but may sit a
    /// rounding error outside it (e.g. `exp(exp(A))` evaluates to
    /// 100 + 4e-14).
    pub(crate) fn from_formula(value: f64) -> Self {
        debug_assert!(
            (-1e-9..=100.0 + 1e-9).contains(&value),
            "formula produced {value}, far outside [0, 100]"
        );
        Self(value.clamp(0.0, 100.0))
    }
}

impl std::fmt::Display for Percent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}%", self.0)
    }
}

/// One point of the Lorenz curve: the share of the population with income
/// below `x` against the share of total income that population earns.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LorenzPoint {
    pub population: Percent,
    pub income: Percent,
}

/// Result of recovering the Pareto index from Gompertz-side quantities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlphaInversion {
    pub alpha: f64,
    /// The bracketed ratio the inversion hinges on; must lie in (0, 1).
    pub ratio: f64,
    /// Sensitivity of the recovered index to the labor share input. The
    /// inversion is only as accurate as `u`, `B` and `x_t` are.
    pub dalpha_du: f64,
}

/// Parameters of the Gompertz-Pareto distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpdParams {
    b: f64,
    x_t: f64,
    alpha: f64,
}

impl GpdParams {
    /// All three parameters must be positive and finite. `alpha <= 1` is
    /// accepted here; operations that need a finite mean reject it at call
    /// time.
    pub fn new(b: f64, x_t: f64, alpha: f64) -> Result<Self, GpdError> {
        for (name, value) in [("B", b), ("x_t", x_t), ("alpha", alpha)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(GpdError::NonPositiveParameter { name, value });
            }
        }
        Ok(Self { b, x_t, alpha })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn x_t(&self) -> f64 {
        self.x_t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Distribution value at the branch frontier, `F(x_t) = exp(exp(A - B x_t))`.
    /// Doubles as the Pareto normalization constant divided by `x_t^alpha`.
    pub fn ccdf_at_threshold(&self) -> f64 {
        (GOMPERTZ_INTERCEPT - self.b * self.x_t).exp().exp()
    }

    /// Complementary cumulative distribution: percent of individuals with
    /// income `>= x`. Continuous across the branch frontier by construction.
    pub fn ccdf(&self, x: f64) -> Result<Percent, GpdError> {
        if x.is_nan() || x < 0.0 {
            return Err(GpdError::NegativeIncome { x });
        }
        let value = if x < self.x_t {
            (GOMPERTZ_INTERCEPT - self.b * x).exp().exp()
        } else {
            (self.x_t / x).powf(self.alpha) * self.ccdf_at_threshold()
        };
        Ok(Percent::from_formula(value))
    }

    /// Cumulative distribution, `100 - ccdf(x)`.
    pub fn cdf(&self, x: f64) -> Result<Percent, GpdError> {
        Ok(Percent::from_formula(100.0 - self.ccdf(x)?.value()))
    }

    /// Probability density, in percent per normalized-income unit.
    pub fn pdf(&self, x: f64) -> Result<f64, GpdError> {
        if x.is_nan() || x < 0.0 {
            return Err(GpdError::NegativeIncome { x });
        }
        if x < self.x_t {
            Ok(self.gompertz_density(x))
        } else {
            Ok(self.alpha * self.ccdf_at_threshold() / x * (self.x_t / x).powf(self.alpha))
        }
    }

    /// Gompertz-branch density `B e^(A-Bx) e^(e^(A-Bx))`, valid for x < x_t.
    fn gompertz_density(&self, x: f64) -> f64 {
        let inner = (GOMPERTZ_INTERCEPT - self.b * x).exp();
        self.b * inner * inner.exp()
    }

    /// First partial moment of the Gompertz branch,
    /// `I(x) = integral of w g(w) dw over [0, x]`, by adaptive quadrature.
    pub fn gompertz_partial_moment(&self, x: f64) -> Result<f64, GpdError> {
        if !(0.0..=self.x_t).contains(&x) {
            return Err(GpdError::OutsideGompertzRegion { x, x_t: self.x_t });
        }
        Ok(self.partial_moment_with_tol(x, quad::DEFAULT_ABS_TOL))
    }

    pub(crate) fn partial_moment_with_tol(&self, x: f64, abs_tol: f64) -> f64 {
        quad::integrate(|w| w * self.gompertz_density(w), 0.0, x, abs_tol)
    }

    /// Average income of the whole population,
    /// `(I(x_t) + alpha x_t F(x_t) / (alpha - 1)) / 100`.
    ///
    /// The Pareto tail term comes from the closed-form antiderivative of
    /// `x p(x)`; it converges only for alpha > 1.
    pub fn mean_income(&self) -> Result<f64, GpdError> {
        if self.alpha <= 1.0 {
            return Err(GpdError::DivergentMean { alpha: self.alpha });
        }
        let tail = self.alpha * self.x_t * self.ccdf_at_threshold() / (self.alpha - 1.0);
        Ok((self.gompertz_partial_moment(self.x_t)? + tail) / 100.0)
    }

    /// Lorenz curve point at income `x`: cumulative population share against
    /// the first-moment distribution (cumulative income share).
    pub fn lorenz(&self, x: f64) -> Result<LorenzPoint, GpdError> {
        let population = self.cdf(x)?;
        let mean = self.mean_income()?;
        let income = if x < self.x_t {
            self.gompertz_partial_moment(x)? / mean
        } else {
            // Closed form of 100 + alpha x_t^alpha / (1 - alpha) * F(x_t)/<x> * x^(1-alpha).
            100.0
                - self.alpha / (self.alpha - 1.0) * self.x_t / mean
                    * self.ccdf_at_threshold()
                    * (self.x_t / x).powf(self.alpha - 1.0)
        };
        Ok(LorenzPoint {
            population,
            income: Percent::from_formula(income),
        })
    }

    /// Gini coefficient on the [0, 1] scale.
    ///
    /// Evaluates the closed-form expression
    /// `1 - 2e-4 { B/<x> J + 100 F(x_t) + alpha^2 x_t F(x_t)^2 / (<x> (alpha-1)(1-2alpha)) }`
    /// with `J = integral of I(x) e^(A-Bx) e^(e^(A-Bx)) dx` over the Gompertz
    /// region. `B J` is computed by parts as
    /// `integral of x g(x) e^(e^(A-Bx)) dx - I(x_t) F(x_t)`, which avoids
    /// nesting one adaptive quadrature inside another.
    pub fn gini(&self) -> Result<f64, GpdError> {
        let mean = self.mean_income()?;
        let e_t = self.ccdf_at_threshold();
        let by_parts = quad::integrate(
            |x| {
                let inner = (GOMPERTZ_INTERCEPT - self.b * x).exp();
                x * self.b * inner * (2.0 * inner).exp()
            },
            0.0,
            self.x_t,
            quad::DEFAULT_ABS_TOL,
        );
        let gompertz_term = (by_parts - self.gompertz_partial_moment(self.x_t)? * e_t) / mean;
        let pareto_term = self.alpha * self.alpha * self.x_t * e_t * e_t
            / (mean * (self.alpha - 1.0) * (1.0 - 2.0 * self.alpha));
        Ok(1.0 - 2.0e-4 * (gompertz_term + 100.0 * e_t + pareto_term))
    }

    /// Percentage share of total income earned by the Gompertzian (labor)
    /// segment: the first-moment distribution evaluated at the threshold.
    pub fn labor_share(&self) -> Result<Percent, GpdError> {
        let share = self.lorenz(self.x_t)?.income;
        if share.value() <= 0.0 || share.value() >= 100.0 {
            return Err(GpdError::InfeasibleLaborShare {
                share: share.value(),
            });
        }
        Ok(share)
    }

    /// Share of individuals effectively unemployed: cumulative income share
    /// below the unemployment income threshold `x_d`, which must lie inside
    /// the Gompertz region.
    pub fn unemployment_share(&self, x_d: f64) -> Result<Percent, GpdError> {
        if x_d.is_nan() || x_d < 0.0 {
            return Err(GpdError::NegativeIncome { x: x_d });
        }
        if x_d >= self.x_t {
            return Err(GpdError::ThresholdNotBelowCutoff { x_d, x_t: self.x_t });
        }
        let v = self.gompertz_partial_moment(x_d)? / self.mean_income()?;
        Ok(Percent::from_formula(v))
    }
}

/// Capital share of national income: the complement of the labor share.
pub fn capital_share(labor: Percent) -> Percent {
    Percent::from_formula(100.0 - labor.value())
}

/// Recover the Pareto index from Gompertz-side quantities: the labor share
/// `u`, slope `B`, and threshold `x_t`, via
/// `1/alpha = 1 - u x_t F(x_t) / ((100 - u) I(x_t))`.
///
/// The expression is explicit, but sharply nonlinear in `u`; the returned
/// `dalpha_du` quantifies how much an error in `u` inflates the result.
pub fn invert_alpha(u: Percent, b: f64, x_t: f64) -> Result<AlphaInversion, GpdError> {
    // alpha plays no role below; any valid placeholder gives the same
    // Gompertz-side quantities.
    let gompertz = GpdParams::new(b, x_t, 2.0)?;
    let u = u.value();
    if u >= 100.0 {
        return Err(GpdError::InfeasibleLaborShare { share: u });
    }
    let moment = gompertz.gompertz_partial_moment(x_t)?;
    let e_t = gompertz.ccdf_at_threshold();
    let ratio = u * x_t * e_t / ((100.0 - u) * moment);
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(GpdError::InfeasibleShareRatio { ratio });
    }
    let alpha = 1.0 / (1.0 - ratio);
    let dratio_du = x_t * e_t / moment * 100.0 / ((100.0 - u) * (100.0 - u));
    Ok(AlphaInversion {
        alpha,
        ratio,
        dalpha_du: alpha * alpha * dratio_du,
    })
}

/// Exponential approximation of the upper Gompertz region (the middle
/// class), `F(x) ~ 99 + e^(-Bx)`. Normalized to the `F(0) = 100` boundary
/// condition; its stated domain is `Bx > A`, `x < x_t`, but the domain is
/// documentation rather than an enforced precondition.
pub fn exp_approx_ccdf(b: f64, x: f64) -> Percent {
    Percent::from_formula(99.0 + (-b * x).exp())
}

/// Companion of [`exp_approx_ccdf`]: `1 - e^(-Bx)`.
pub fn exp_approx_cdf(b: f64, x: f64) -> Percent {
    Percent::from_formula(1.0 - (-b * x).exp())
}

/// Companion density of [`exp_approx_ccdf`]: `B e^(-Bx)`.
pub fn exp_approx_pdf(b: f64, x: f64) -> f64 {
    b * (-b * x).exp()
}
