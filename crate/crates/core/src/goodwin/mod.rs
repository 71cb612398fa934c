//! Growth-cycle dynamics: the Goodwin model and its bounded-domain extension.
//!
//! The Goodwin model couples the labor share `u` and the employment rate `v`
//! (both percent) as a Lotka-Volterra pair
//!
//! ```text
//! du/dt = (-a1 + b1 v) u,      dv/dt = (a2 - b2 u) v,
//! ```
//!
//! whose grouped constants come from five economic parameters `a, b, c, d, h`
//! via `a1 = a+d`, `a2 = 100/c - (a+b)`, `b1 = h`, `b2 = 100/c`. Orbits are
//! closed around the center `(a2/b2, a1/b1)` with small-amplitude period
//! `2 pi / sqrt(a1 a2)`, and `H = b2 u - a2 ln u + b1 v - a1 ln v` is
//! conserved along exact solutions.
//!
//! The extension replaces the linear wage response with a nonlinear term in
//! the unemployment rate `V = 100 - v` and the investment response with a
//! logarithm of the distance to a tolerated labor-share ceiling `u_bar`,
//! which confines trajectories to the economic domain:
//!
//! ```text
//! du/dt = (-a1 + b1 V^delta) u,    dv/dt = (-a2 + b2 ln(u_bar - u)) v.
//! ```

mod integrate;

pub use integrate::{
    integrate, orbit_period, DomainExit, DynamicsModel, ExitReason, PeriodEstimate, Trajectory,
    TrajectoryPoint,
};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("state must be positive, got (u, v) = ({u}, {v})")]
    NonPositiveState { u: f64, v: f64 },
    #[error("state ({u}, {v}) outside the model domain {domain}")]
    OutsideDomain { u: f64, v: f64, domain: String },
    #[error("no oscillatory center: a1*a2 = {product} must be positive")]
    NoOscillatoryCenter { product: f64 },
    #[error("parameter {name} must be nonzero")]
    DegenerateParameter { name: &'static str },
    #[error("u_bar must lie in (0, 100), got {u_bar}")]
    InvalidUBar { u_bar: f64 },
    #[error("step must be positive and finite, got {step}")]
    InvalidStep { step: f64 },
    #[error("t_end must be non-negative and finite, got {t_end}")]
    InvalidTimeSpan { t_end: f64 },
    #[error("only {crossings} section crossing(s) found; no period detectable")]
    NoPeriod { crossings: usize },
    #[error("fixed point undefined: {reason}")]
    NoFixedPoint { reason: String },
}

/// Verdict on one parameter inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionStatus {
    Holds,
    Fails,
    /// The deciding quantity sits exactly on the boundary or cannot be
    /// recovered from the grouped constants.
    Undetermined,
    /// A supplied standard error is at least as large as the value itself.
    Inconclusive,
}

/// One evaluated inequality.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub value: Option<f64>,
    pub std_err: Option<f64>,
    pub status: ConditionStatus,
}

impl ConditionCheck {
    fn strict(name: &str, value: f64, holds_if_positive: bool, std_err: Option<f64>) -> Self {
        let oriented = if holds_if_positive { value } else { -value };
        let status = if let Some(se) = std_err.filter(|se| *se >= value.abs()) {
            let _ = se;
            ConditionStatus::Inconclusive
        } else if oriented > 0.0 {
            ConditionStatus::Holds
        } else if oriented < 0.0 {
            ConditionStatus::Fails
        } else {
            ConditionStatus::Undetermined
        };
        Self {
            name: name.to_string(),
            value: Some(value),
            std_err,
            status,
        }
    }

    fn undetermined(name: &str) -> Self {
        Self {
            name: name.to_string(),
            value: None,
            std_err: None,
            status: ConditionStatus::Undetermined,
        }
    }
}

/// Evaluation of a full inequality set.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    /// The textbook constraint set the model was proposed with.
    pub textbook: Vec<ConditionCheck>,
    /// The sign pattern observed when the model is fitted to the yearly data.
    pub empirical: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn textbook_holds(&self) -> bool {
        self.textbook
            .iter()
            .all(|c| c.status == ConditionStatus::Holds)
    }
}

/// The five raw constants of the Goodwin model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawGoodwinParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub h: f64,
}

/// Goodwin model constants in grouped form, with the raw quintuple retained
/// when it was supplied.
///
/// The grouped form determines `c`, `h`, `(a+d)` and `(a+b)` exactly; only
/// the split within the two sums stays unknown, so converting grouped to raw
/// is underdetermined by two parameters and is never attempted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodwinParams {
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    raw: Option<RawGoodwinParams>,
}

/// Orbit center and small-amplitude period.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitCenter {
    pub u: f64,
    pub v: f64,
    pub period: f64,
}

impl GoodwinParams {
    pub fn from_grouped(a1: f64, a2: f64, b1: f64, b2: f64) -> Self {
        Self {
            a1,
            a2,
            b1,
            b2,
            raw: None,
        }
    }

    /// Group the raw constants: `a1 = a+d`, `a2 = 100/c - (a+b)`, `b1 = h`,
    /// `b2 = 1/c`. With shares on the 0-100 scale, `b2 = 1/c` is the value
    /// that makes the grouped equations, the five-parameter equations and
    /// the center formula `u_c = 100 - (a+b)c = a2/b2` agree.
    pub fn from_raw(raw: RawGoodwinParams) -> Result<Self, SimError> {
        if raw.c == 0.0 {
            return Err(SimError::DegenerateParameter { name: "c" });
        }
        Ok(Self {
            a1: raw.a + raw.d,
            a2: 100.0 / raw.c - (raw.a + raw.b),
            b1: raw.h,
            b2: 1.0 / raw.c,
            raw: Some(raw),
        })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn raw(&self) -> Option<&RawGoodwinParams> {
        self.raw.as_ref()
    }

    /// Time derivatives `(du/dt, dv/dt)` at a positive state.
    pub fn rhs(&self, u: f64, v: f64) -> Result<(f64, f64), SimError> {
        if !(u > 0.0 && v > 0.0) {
            return Err(SimError::NonPositiveState { u, v });
        }
        Ok(self.rhs_unchecked(u, v))
    }

    pub(crate) fn rhs_unchecked(&self, u: f64, v: f64) -> (f64, f64) {
        ((-self.a1 + self.b1 * v) * u, (self.a2 - self.b2 * u) * v)
    }

    /// The unique orbit center `(a2/b2, a1/b1)` and the small-amplitude
    /// period `2 pi / sqrt(a1 a2)`.
    ///
    /// Fails when `a1 a2 <= 0` (no oscillation around an interior center;
    /// the regime the fitted yearly data lands in when signs disagree).
    pub fn center(&self) -> Result<OrbitCenter, SimError> {
        if self.b1 == 0.0 {
            return Err(SimError::DegenerateParameter { name: "b1" });
        }
        if self.b2 == 0.0 {
            return Err(SimError::DegenerateParameter { name: "b2" });
        }
        let product = self.a1 * self.a2;
        if product <= 0.0 {
            return Err(SimError::NoOscillatoryCenter { product });
        }
        Ok(OrbitCenter {
            u: self.a2 / self.b2,
            v: self.a1 / self.b1,
            period: 2.0 * std::f64::consts::PI / product.sqrt(),
        })
    }

    /// First integral of the system,
    /// `H(u, v) = b2 u - a2 ln u + b1 v - a1 ln v`; constant along exact
    /// trajectories, so its drift measures integrator error.
    pub fn conserved_quantity(&self, u: f64, v: f64) -> Result<f64, SimError> {
        if !(u > 0.0 && v > 0.0) {
            return Err(SimError::NonPositiveState { u, v });
        }
        Ok(self.b2 * u - self.a2 * u.ln() + self.b1 * v - self.a1 * v.ln())
    }

    /// Raw-side quantities recoverable from the grouped constants:
    /// `c = 1/b2`, `h = b1`, `(a+d) = a1`, `(a+b) = 100 b2 - a2` and the
    /// product `(a+b) c = 100 - a2/b2`. The split inside the two sums stays
    /// unknown.
    fn recovered(&self) -> Option<(f64, f64, f64, f64)> {
        if self.b2 == 0.0 {
            return None;
        }
        let c = 1.0 / self.b2;
        let ab_c = 100.0 - self.a2 / self.b2;
        Some((c, self.b1, self.a1, ab_c))
    }

    /// Flag stating whether the textbook constraint set holds.
    pub fn textbook_regime(&self) -> bool {
        self.conditions().textbook_holds()
    }

    /// Evaluate both inequality sets: the textbook one
    /// (`c > 0`, `h > 0`, `(a+d) > 0`, `(a+b)c < 100`) and the empirical
    /// sign pattern the fitted data produces
    /// (`c < 0`, `h < 0`, `(a+d) < 0`, `(a+b)c > 100`).
    pub fn conditions(&self) -> ConditionReport {
        let Some((c, h, a_plus_d, ab_c)) = self.recovered() else {
            let names_t = ["c > 0", "h > 0", "(a+d) > 0", "(a+b)c < 100"];
            let names_e = ["c < 0", "h < 0", "(a+d) < 0", "(a+b)c > 100"];
            return ConditionReport {
                textbook: names_t.iter().map(|n| ConditionCheck::undetermined(n)).collect(),
                empirical: names_e.iter().map(|n| ConditionCheck::undetermined(n)).collect(),
            };
        };
        ConditionReport {
            textbook: vec![
                ConditionCheck::strict("c > 0", c, true, None),
                ConditionCheck::strict("h > 0", h, true, None),
                ConditionCheck::strict("(a+d) > 0", a_plus_d, true, None),
                ConditionCheck::strict("(a+b)c < 100", ab_c - 100.0, false, None),
            ],
            empirical: vec![
                ConditionCheck::strict("c < 0", c, false, None),
                ConditionCheck::strict("h < 0", h, false, None),
                ConditionCheck::strict("(a+d) < 0", a_plus_d, false, None),
                ConditionCheck::strict("(a+b)c > 100", ab_c - 100.0, true, None),
            ],
        }
    }
}

/// Raw constants of the extended model (the bars of the grouped form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawDhmpParams {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub h: f64,
    pub lambda: f64,
}

/// Extended-model constants in grouped form plus the Phillips exponent
/// `delta` and the tolerated labor-share ceiling `u_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DhmpParams {
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    delta: f64,
    u_bar: f64,
    raw: Option<RawDhmpParams>,
}

/// Optional 1-sigma uncertainties for condition evaluation.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct DhmpUncertainty {
    pub a1_se: Option<f64>,
    pub a2_se: Option<f64>,
    pub b1_se: Option<f64>,
    pub b2_se: Option<f64>,
    pub delta_se: Option<f64>,
}

impl DhmpParams {
    pub fn from_grouped(
        a1: f64,
        a2: f64,
        b1: f64,
        b2: f64,
        delta: f64,
        u_bar: f64,
    ) -> Result<Self, SimError> {
        if !(u_bar > 0.0 && u_bar < 100.0) {
            return Err(SimError::InvalidUBar { u_bar });
        }
        Ok(Self {
            a1,
            a2,
            b1,
            b2,
            delta,
            u_bar,
            raw: None,
        })
    }

    /// Group the seven raw constants: `a1 = a+d`,
    /// `a2 = lambda ln(100 - u_bar) + (a+b)`, `b1 = h`, `b2 = lambda`.
    pub fn from_raw(raw: RawDhmpParams, delta: f64, u_bar: f64) -> Result<Self, SimError> {
        if !(u_bar > 0.0 && u_bar < 100.0) {
            return Err(SimError::InvalidUBar { u_bar });
        }
        Ok(Self {
            a1: raw.a + raw.d,
            a2: raw.lambda * (100.0 - u_bar).ln() + (raw.a + raw.b),
            b1: raw.h,
            b2: raw.lambda,
            delta,
            u_bar,
            raw: Some(raw),
        })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn u_bar(&self) -> f64 {
        self.u_bar
    }

    pub fn raw(&self) -> Option<&RawDhmpParams> {
        self.raw.as_ref()
    }

    fn in_domain(&self, u: f64, v: f64) -> bool {
        u > 0.0 && u < self.u_bar && v > 0.0 && v < 100.0
    }

    /// Time derivatives on the open domain `(0, u_bar) x (0, 100)`.
    ///
    /// The logarithm diverges as `u` approaches `u_bar`, which is what
    /// pushes trajectories back inside; at or beyond the ceiling the system
    /// is undefined.
    pub fn rhs(&self, u: f64, v: f64) -> Result<(f64, f64), SimError> {
        if !self.in_domain(u, v) {
            return Err(SimError::OutsideDomain {
                u,
                v,
                domain: format!("(0, {}) x (0, 100)", self.u_bar),
            });
        }
        Ok(self.rhs_unchecked(u, v))
    }

    pub(crate) fn rhs_unchecked(&self, u: f64, v: f64) -> (f64, f64) {
        let unemployment = 100.0 - v;
        (
            (-self.a1 + self.b1 * unemployment.powf(self.delta)) * u,
            (-self.a2 + self.b2 * (self.u_bar - u).ln()) * v,
        )
    }

    /// Stationary point derived from the grouped equations:
    /// `V* = (a1/b1)^(1/delta)`, `u* = u_bar - exp(a2/b2)`.
    pub fn fixed_point(&self) -> Result<(f64, f64), SimError> {
        if self.b1 == 0.0 || self.a1 / self.b1 <= 0.0 {
            return Err(SimError::NoFixedPoint {
                reason: format!("a1/b1 = {}/{} has no positive real root", self.a1, self.b1),
            });
        }
        if self.b2 == 0.0 {
            return Err(SimError::NoFixedPoint {
                reason: "b2 = 0".to_string(),
            });
        }
        let v_star = 100.0 - (self.a1 / self.b1).powf(1.0 / self.delta);
        let u_star = self.u_bar - (self.a2 / self.b2).exp();
        if !self.in_domain(u_star, v_star) {
            return Err(SimError::NoFixedPoint {
                reason: format!("stationary state ({u_star}, {v_star}) leaves the domain"),
            });
        }
        Ok((u_star, v_star))
    }

    /// Evaluate the textbook constraint set and the empirically observed
    /// sign pattern, flagging entries whose uncertainty swallows the value.
    pub fn conditions(&self, uncertainty: Option<&DhmpUncertainty>) -> ConditionReport {
        let unc = uncertainty.copied().unwrap_or_default();
        let lambda = self.b2;
        let h_bar = self.b1;
        let a_plus_d = self.a1;
        let log_tail = (100.0 - self.u_bar).ln();
        let a_plus_b = self.a2 - lambda * log_tail;
        // Uncorrelated first-order propagation for a2 - lambda ln(100 - u_bar).
        let a_plus_b_se = match (unc.a2_se, unc.b2_se) {
            (Some(sa), Some(sb)) => Some((sa * sa + log_tail * log_tail * sb * sb).sqrt()),
            _ => None,
        };
        let odds = self.u_bar / (100.0 - self.u_bar);
        let wage_margin = lambda * odds.ln() - a_plus_b;
        let textbook = vec![
            ConditionCheck::strict("delta > 0", self.delta, true, unc.delta_se),
            ConditionCheck::strict("lambda > 0", lambda, true, unc.b2_se),
            ConditionCheck::strict("u_bar < 100", 100.0 - self.u_bar, true, None),
            ConditionCheck::strict("h < (a+d)", a_plus_d - h_bar, true, None),
            ConditionCheck::strict(
                "(a+b) < lambda ln(u_bar/(100-u_bar))",
                wage_margin,
                true,
                None,
            ),
            ConditionCheck::strict("u_bar/(100-u_bar) > 1", odds - 1.0, true, None),
        ];
        let empirical = vec![
            ConditionCheck::strict("delta > 0", self.delta, true, unc.delta_se),
            ConditionCheck::strict("h > 0", h_bar, true, unc.b1_se),
            ConditionCheck::strict("(a+d) > 0", a_plus_d, true, unc.a1_se),
            ConditionCheck::strict("lambda < 0", lambda, false, unc.b2_se),
            ConditionCheck::strict(
                "(a+b) < -lambda ln(100-u_bar)",
                -lambda * log_tail - a_plus_b,
                true,
                a_plus_b_se,
            ),
        ];
        ConditionReport {
            textbook,
            empirical,
        }
    }
}
