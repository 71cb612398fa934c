//! Fixed-step RK4 integration and orbit-period detection.

use serde::Serialize;

use super::{DhmpParams, GoodwinParams, SimError};

/// Which dynamics to integrate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DynamicsModel {
    Goodwin(GoodwinParams),
    Dhmp(DhmpParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

/// Why an integration stopped before `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitReason {
    /// `u` reached the tolerated labor-share ceiling.
    LaborShareCeiling,
    /// `v` reached 100 (vanishing unemployment; the log-extension domain ends).
    FullEmployment,
    /// A state component stopped being positive.
    NonPositiveState,
}

/// Diagnostic attached to a truncated trajectory: the last valid time and
/// the state the step was about to enter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainExit {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub reason: ExitReason,
}

/// Time-ordered `(t, u, v)` triples with integration metadata.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub method: &'static str,
    pub step: f64,
    /// A recorded state exceeded 100 percent (possible in the unbounded
    /// model; worth knowing about even though integration continues).
    pub domain_excursion: bool,
    /// Set when the bounded model left its domain and the run was truncated.
    pub exit: Option<DomainExit>,
    /// Goodwin only: max relative drift of the conserved quantity across the
    /// run, a direct measure of integrator error.
    pub conserved_drift: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> TrajectoryPoint {
        *self.points.last().expect("trajectory has at least the initial point")
    }
}

fn model_rhs(model: &DynamicsModel, u: f64, v: f64) -> (f64, f64) {
    match model {
        DynamicsModel::Goodwin(p) => p.rhs_unchecked(u, v),
        DynamicsModel::Dhmp(p) => p.rhs_unchecked(u, v),
    }
}

fn state_valid(model: &DynamicsModel, u: f64, v: f64) -> Result<(), ExitReason> {
    if !(u > 0.0 && v > 0.0) || !u.is_finite() || !v.is_finite() {
        return Err(ExitReason::NonPositiveState);
    }
    if let DynamicsModel::Dhmp(p) = model {
        if u >= p.u_bar() {
            return Err(ExitReason::LaborShareCeiling);
        }
        if v >= 100.0 {
            return Err(ExitReason::FullEmployment);
        }
    }
    Ok(())
}

/// One classical RK4 step. Fails if any stage state leaves the model domain.
fn rk4_step(model: &DynamicsModel, u: f64, v: f64, h: f64) -> Result<(f64, f64), ExitReason> {
    let stage = |u: f64, v: f64| -> Result<(f64, f64), ExitReason> {
        state_valid(model, u, v)?;
        Ok(model_rhs(model, u, v))
    };
    let (k1u, k1v) = stage(u, v)?;
    let (k2u, k2v) = stage(u + 0.5 * h * k1u, v + 0.5 * h * k1v)?;
    let (k3u, k3v) = stage(u + 0.5 * h * k2u, v + 0.5 * h * k2v)?;
    let (k4u, k4v) = stage(u + h * k3u, v + h * k3v)?;
    Ok((
        u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    ))
}

/// Integrate from `(u0, v0)` to `t_end` with fixed step `step` (a final
/// shorter step lands exactly on `t_end`).
///
/// Bounded-model runs that leave the domain return the truncated trajectory
/// with an exit diagnostic rather than an error.
pub fn integrate(
    model: &DynamicsModel,
    initial: (f64, f64),
    t_end: f64,
    step: f64,
) -> Result<Trajectory, SimError> {
    if step.is_nan() || step <= 0.0 || !step.is_finite() {
        return Err(SimError::InvalidStep { step });
    }
    if t_end.is_nan() || t_end < 0.0 || !t_end.is_finite() {
        return Err(SimError::InvalidTimeSpan { t_end });
    }
    let (u0, v0) = initial;
    if let Err(reason) = state_valid(model, u0, v0) {
        return match (reason, model) {
            (ExitReason::NonPositiveState, _) => Err(SimError::NonPositiveState { u: u0, v: v0 }),
            (_, DynamicsModel::Dhmp(p)) => Err(SimError::OutsideDomain {
                u: u0,
                v: v0,
                domain: format!("(0, {}) x (0, 100)", p.u_bar()),
            }),
            (_, DynamicsModel::Goodwin(_)) => unreachable!("goodwin has no upper domain bound"),
        };
    }

    let goodwin = match model {
        DynamicsModel::Goodwin(p) => Some(p),
        DynamicsModel::Dhmp(_) => None,
    };
    let h_ref = goodwin.and_then(|p| p.conserved_quantity(u0, v0).ok());

    let n_whole = (t_end / step).floor() as usize;
    let mut points = Vec::with_capacity(n_whole + 2);
    points.push(TrajectoryPoint { t: 0.0, u: u0, v: v0 });
    let mut excursion = u0 > 100.0 || v0 > 100.0;
    let mut max_drift: f64 = 0.0;
    let mut exit = None;

    let (mut u, mut v) = (u0, v0);
    let mut i: usize = 0;
    loop {
        let t = i as f64 * step;
        if t >= t_end - 1e-12 * t_end.max(1.0) {
            break;
        }
        let h = step.min(t_end - t);
        match rk4_step(model, u, v, h) {
            Ok((nu, nv)) => {
                if let Err(reason) = state_valid(model, nu, nv) {
                    exit = Some(DomainExit { t, u: nu, v: nv, reason });
                    break;
                }
                u = nu;
                v = nv;
            }
            Err(reason) => {
                exit = Some(DomainExit { t, u, v, reason });
                break;
            }
        }
        let t_next = if h < step { t_end } else { (i + 1) as f64 * step };
        points.push(TrajectoryPoint { t: t_next, u, v });
        excursion |= u > 100.0 || v > 100.0;
        if let (Some(p), Some(h0)) = (goodwin, h_ref) {
            if let Ok(hi) = p.conserved_quantity(u, v) {
                max_drift = max_drift.max((hi - h0).abs() / h0.abs().max(f64::MIN_POSITIVE));
            }
        }
        i += 1;
    }

    Ok(Trajectory {
        points,
        method: "rk4",
        step,
        domain_excursion: excursion,
        exit,
        conserved_drift: h_ref.map(|_| max_drift),
    })
}

/// Detected orbit period.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeriodEstimate {
    pub period: f64,
    /// Number of same-direction section crossings the mean is taken over.
    pub crossings: usize,
    /// Which state component defined the section, "u" or "v".
    pub section: &'static str,
}

/// Mean time between successive same-direction crossings of the section
/// through the trajectory's initial state, with linear interpolation between
/// bracketing samples.
///
/// The section `u = u(0)` is tried first; when the orbit only touches it
/// tangentially (fewer than two transversal crossings, as happens when the
/// start lies at a turning point), the section `v = v(0)` is used instead.
pub fn orbit_period(traj: &Trajectory) -> Result<PeriodEstimate, SimError> {
    let pts = &traj.points;
    if pts.len() < 3 {
        return Err(SimError::NoPeriod { crossings: 0 });
    }
    let u_crossings = section_crossings(pts, |p| p.u, pts[0].u);
    if let Some(estimate) = mean_spacing(&u_crossings, "u") {
        return Ok(estimate);
    }
    let v_crossings = section_crossings(pts, |p| p.v, pts[0].v);
    if let Some(estimate) = mean_spacing(&v_crossings, "v") {
        return Ok(estimate);
    }
    Err(SimError::NoPeriod {
        crossings: u_crossings.len().max(v_crossings.len()),
    })
}

/// Times of same-direction crossings of `coord = level`. Upward crossings
/// are used when available, otherwise downward; one orbit crosses a
/// transversal section once per period in each direction.
fn section_crossings<F: Fn(&TrajectoryPoint) -> f64>(
    pts: &[TrajectoryPoint],
    coord: F,
    level: f64,
) -> Vec<f64> {
    let mut up = Vec::new();
    let mut down = Vec::new();
    for w in pts.windows(2) {
        let (c0, c1) = (coord(&w[0]), coord(&w[1]));
        let crossing = |lo: f64, hi: f64| {
            let frac = (level - lo) / (hi - lo);
            w[0].t + frac * (w[1].t - w[0].t)
        };
        if c0 <= level && c1 > level {
            up.push(crossing(c0, c1));
        } else if c0 >= level && c1 < level {
            down.push(crossing(c0, c1));
        }
    }
    if up.len() >= 2 {
        up
    } else {
        down
    }
}

fn mean_spacing(crossings: &[f64], section: &'static str) -> Option<PeriodEstimate> {
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings.last().unwrap() - crossings.first().unwrap();
    Some(PeriodEstimate {
        period: span / (crossings.len() - 1) as f64,
        crossings: crossings.len(),
        section,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn textbook() -> GoodwinParams {
        GoodwinParams::from_grouped(1.0, 1.0, 0.02, 0.02)
    }

    #[test]
    fn center_start_stays_put() {
        let p = textbook();
        let c = p.center().unwrap();
        let traj = integrate(&DynamicsModel::Goodwin(p), (c.u, c.v), 10.0, 1e-3).unwrap();
        for pt in &traj.points {
            assert_abs_diff_eq!(pt.u, c.u, epsilon = 1e-12);
            assert_abs_diff_eq!(pt.v, c.v, epsilon = 1e-12);
        }
        assert!(orbit_period(&traj).is_err());
    }

    #[test]
    fn trajectory_lands_exactly_on_t_end() {
        let p = textbook();
        let traj = integrate(&DynamicsModel::Goodwin(p), (51.0, 50.0), 1.0005, 1e-3).unwrap();
        assert_abs_diff_eq!(traj.last().t, 1.0005, epsilon = 1e-12);
    }

    #[test]
    fn closed_orbit_returns_to_start_after_detected_period() {
        let p = textbook();
        let model = DynamicsModel::Goodwin(p);
        let scout = integrate(&model, (51.0, 50.0), 20.0, 1e-3).unwrap();
        let period = orbit_period(&scout).unwrap();
        // The start sits at a u-turning point, so the detector falls back to
        // the v section.
        assert_eq!(period.section, "v");
        let one_lap = integrate(&model, (51.0, 50.0), period.period, 1e-3).unwrap();
        let end = one_lap.last();
        assert_abs_diff_eq!(end.u, 51.0, epsilon = 1e-6);
        assert_abs_diff_eq!(end.v, 50.0, epsilon = 1e-6);
    }

    #[test]
    fn small_amplitude_period_matches_formula() {
        let p = textbook();
        let c = p.center().unwrap();
        let traj = integrate(
            &DynamicsModel::Goodwin(p),
            (c.u, c.v * 1.01),
            5.0 * c.period,
            1e-3,
        )
        .unwrap();
        let detected = orbit_period(&traj).unwrap();
        assert_eq!(detected.section, "u");
        assert!((detected.period - c.period).abs() / c.period < 5e-3);
    }

    #[test]
    fn period_grows_with_amplitude() {
        let p = textbook();
        let c = p.center().unwrap();
        let model = DynamicsModel::Goodwin(p);
        let small = orbit_period(
            &integrate(&model, (c.u, c.v * 1.01), 5.0 * c.period, 1e-3).unwrap(),
        )
        .unwrap();
        let large = orbit_period(
            &integrate(&model, (c.u, c.v * 1.30), 7.0 * c.period, 1e-3).unwrap(),
        )
        .unwrap();
        assert!(large.period >= small.period);
    }

    #[test]
    fn conserved_drift_is_tiny() {
        let p = textbook();
        let c = p.center().unwrap();
        let traj = integrate(
            &DynamicsModel::Goodwin(p),
            (c.u + 1.0, c.v),
            2.0 * c.period,
            1e-3,
        )
        .unwrap();
        assert!(traj.conserved_drift.unwrap() < 1e-10);
    }

    #[test]
    fn distinct_orbits_never_cross() {
        let p = textbook();
        let c = p.center().unwrap();
        let model = DynamicsModel::Goodwin(p);
        let inner = integrate(&model, (c.u + 2.0, c.v), c.period * 1.2, 1e-3).unwrap();
        let outer = integrate(&model, (c.u + 4.0, c.v), c.period * 1.2, 1e-3).unwrap();
        let mut min_dist = f64::INFINITY;
        for a in inner.points.iter().step_by(10) {
            for b in outer.points.iter().step_by(10) {
                let d = ((a.u - b.u).powi(2) + (a.v - b.v).powi(2)).sqrt();
                min_dist = min_dist.min(d);
            }
        }
        // Level sets of the first integral two units apart; far beyond any
        // integration error.
        assert!(min_dist > 0.5, "orbits approach to {min_dist}");
    }

    #[test]
    fn goodwin_excursion_above_100_is_flagged() {
        // A wide orbit pushes v beyond 100; the run continues but the flag
        // records it.
        let p = textbook();
        let traj = integrate(&DynamicsModel::Goodwin(p), (50.0, 102.0), 1.0, 1e-3).unwrap();
        assert!(traj.domain_excursion);
        assert!(traj.exit.is_none());
    }

    #[test]
    fn dhmp_feasible_orbit_stays_bounded() {
        // A textbook-valid set (negative wage response h < a+d < 0) whose
        // stationary point (50, 99.17) is a rotation center; the orbit must
        // stay inside the domain for ten periods (~3.46 each).
        let p = DhmpParams::from_grouped(-0.5, 0.05 * 45.0f64.ln(), -0.6, 0.05, 1.0, 95.0).unwrap();
        assert!(p.conditions(None).textbook_holds());
        let v_star = p.fixed_point().unwrap().1;
        let traj = integrate(&DynamicsModel::Dhmp(p), (45.0, v_star), 40.0, 1e-3).unwrap();
        assert!(traj.exit.is_none());
        for pt in &traj.points {
            assert!(pt.u > 0.0 && pt.u < 95.0);
            assert!(pt.v > 0.0 && pt.v < 100.0);
        }
        let period = orbit_period(&traj).unwrap();
        assert_abs_diff_eq!(period.period, 3.456, epsilon = 0.1);
    }

    #[test]
    fn dhmp_domain_exit_truncates_with_diagnostic() {
        // Strong wage growth pushes u toward the ceiling.
        let p = DhmpParams::from_grouped(-0.5, 0.19, 0.0, 0.05, 1.0, 95.0).unwrap();
        let traj = integrate(&DynamicsModel::Dhmp(p), (90.0, 50.0), 50.0, 1e-3).unwrap();
        let exit = traj.exit.expect("expected a domain exit");
        assert_eq!(exit.reason, ExitReason::LaborShareCeiling);
        assert!(traj.last().t < 50.0);
        assert!(traj.last().u < 95.0);
    }

    #[test]
    fn dhmp_rejects_initial_state_outside_domain() {
        let p = DhmpParams::from_grouped(0.5, 0.19, 0.01, 0.05, 1.0, 95.0).unwrap();
        assert!(matches!(
            integrate(&DynamicsModel::Dhmp(p), (96.0, 50.0), 1.0, 1e-3),
            Err(SimError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn invalid_step_rejected() {
        let p = textbook();
        assert!(matches!(
            integrate(&DynamicsModel::Goodwin(p), (50.0, 50.0), 1.0, 0.0),
            Err(SimError::InvalidStep { .. })
        ));
        assert!(matches!(
            integrate(&DynamicsModel::Goodwin(p), (50.0, 50.0), -1.0, 1e-3),
            Err(SimError::InvalidTimeSpan { .. })
        ));
    }

    #[test]
    fn halving_step_cuts_error_sixteenfold() {
        // Fast dynamics so truncation error dominates roundoff.
        let p = GoodwinParams::from_grouped(25.0, 25.0, 0.5, 0.5);
        let model = DynamicsModel::Goodwin(p);
        let span = 1.9;
        let reference = integrate(&model, (60.0, 50.0), span, 1.25e-4).unwrap().last();
        let coarse = integrate(&model, (60.0, 50.0), span, 4e-3).unwrap().last();
        let fine = integrate(&model, (60.0, 50.0), span, 2e-3).unwrap().last();
        let err = |p: TrajectoryPoint| {
            ((p.u - reference.u).powi(2) + (p.v - reference.v).powi(2)).sqrt()
        };
        let order = (err(coarse) / err(fine)).log2();
        assert!((order - 4.0).abs() < 0.3, "observed order {order}");
    }

    #[test]
    fn time_reversed_trajectory_has_same_invariant_values() {
        let p = textbook();
        let traj = integrate(&DynamicsModel::Goodwin(p), (52.0, 50.0), 3.0, 1e-3).unwrap();
        let forward: Vec<f64> = traj
            .points
            .iter()
            .map(|pt| p.conserved_quantity(pt.u, pt.v).unwrap())
            .collect();
        let mut reversed: Vec<f64> = traj
            .points
            .iter()
            .rev()
            .map(|pt| p.conserved_quantity(pt.u, pt.v).unwrap())
            .collect();
        reversed.reverse();
        assert_eq!(forward, reversed);
    }
}
