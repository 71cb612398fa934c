//! Frozen regression values for the bundled yearly table, computed once
//! with an independent statistics stack (IEEE double precision throughout).
//! Tolerances reflect that only the summation order differs for the linear
//! fits while the nonlinear optimizer may stop on a different ulp.

use approx::assert_relative_eq;
use growth_cycles::data::{load_table1, uv_points};
use growth_cycles::estimation::{
    fit_dhmp, fit_goodwin_lines, phase_centroids, DerivativeOrientation, ExponentGrid, RateSeries,
};

fn rates() -> RateSeries {
    let points = uv_points(&load_table1()).unwrap();
    RateSeries::from_uv(&points, DerivativeOrientation::Reversed).unwrap()
}

#[test]
fn goodwin_line_fits_match_reference_values() {
    let fits = fit_goodwin_lines(&rates(), false).unwrap();
    let wage = &fits.wage;
    assert_relative_eq!(
        wage.coefficient("intercept").unwrap().value,
        0.172_966_058_419_950_4,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        wage.coefficient("intercept").unwrap().std_err,
        0.055_624_804_352_533_135,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        wage.coefficient("slope").unwrap().value,
        -0.001_907_239_260_071_639,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        wage.coefficient("slope").unwrap().std_err,
        0.000_614_111_971_458_336_5,
        max_relative = 1e-9
    );
    let employment = &fits.employment;
    assert_relative_eq!(
        employment.coefficient("intercept").unwrap().value,
        -0.516_457_322_688_214_3,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        employment.coefficient("intercept").unwrap().std_err,
        0.222_802_659_450_221_82,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        employment.coefficient("slope").unwrap().value,
        0.005_980_047_494_763_597,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        employment.coefficient("slope").unwrap().std_err,
        0.002_593_984_683_740_903,
        max_relative = 1e-9
    );
    // Mapped constants and the implied center.
    assert_relative_eq!(fits.params.a1(), -0.172_966_058_419_950_4, max_relative = 1e-9);
    assert_relative_eq!(fits.params.b2(), -0.005_980_047_494_763_597, max_relative = 1e-9);
    let center = fits.params.center().unwrap();
    assert_relative_eq!(center.u, 86.363_414_862_582_27, max_relative = 1e-9);
    assert_relative_eq!(center.v, 90.689_229_212_623_03, max_relative = 1e-9);
}

#[test]
fn dhmp_fits_match_reference_values() {
    let fits = fit_dhmp(&rates(), 95.0, false, ExponentGrid::default()).unwrap();
    let log_fit = &fits.employment_log;
    assert_relative_eq!(
        log_fit.coefficient("intercept").unwrap().value,
        0.114_554_413_486_016_57,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        log_fit.coefficient("intercept").unwrap().std_err,
        0.054_480_581_545_138_66,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        log_fit.coefficient("slope").unwrap().value,
        -0.053_294_385_496_788_124,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        log_fit.coefficient("slope").unwrap().std_err,
        0.024_694_958_672_637_46,
        max_relative = 1e-9
    );
    // Grid stage lands on 1.61, refinement settles nearby with an
    // uncertainty roughly 1.8x the estimate.
    assert_relative_eq!(fits.grid_exponent, 1.61, max_relative = 1e-12);
    let exponent = fits.wage_power.coefficient("exponent").unwrap();
    assert_relative_eq!(exponent.value, 1.606_131_909_969_648_3, max_relative = 1e-5);
    assert_relative_eq!(exponent.std_err, 2.878_072_544_578_373, max_relative = 1e-4);
    let offset = fits.wage_power.coefficient("offset").unwrap();
    assert_relative_eq!(offset.value, -0.010_760_465_385_670_836, max_relative = 1e-4);
    assert_relative_eq!(offset.std_err, 0.021_106_221_700_975_075, max_relative = 1e-4);
    let scale = fits.wage_power.coefficient("scale").unwrap();
    assert_relative_eq!(scale.value, 0.000_289_747_049_832_976_7, max_relative = 1e-3);
    assert_relative_eq!(scale.std_err, 0.002_479_819_975_956_436, max_relative = 1e-4);
}

#[test]
fn forward_orientation_flips_linear_coefficients() {
    let points = uv_points(&load_table1()).unwrap();
    let forward = RateSeries::from_uv(&points, DerivativeOrientation::Forward).unwrap();
    let fits = fit_goodwin_lines(&forward, false).unwrap();
    assert_relative_eq!(
        fits.wage.coefficient("intercept").unwrap().value,
        -0.172_966_058_419_950_4,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        fits.wage.coefficient("slope").unwrap().value,
        0.001_907_239_260_071_639,
        max_relative = 1e-9
    );
}

#[test]
fn excluding_interpolated_years_changes_the_fit() {
    let r = rates();
    let all = fit_goodwin_lines(&r, false).unwrap();
    let sampled_only = fit_goodwin_lines(&r, true).unwrap();
    assert_eq!(all.wage.n_points, 27);
    assert_eq!(sampled_only.wage.n_points, 24);
    // Reference values for the 24-point variant.
    assert_relative_eq!(
        sampled_only.wage.coefficient("intercept").unwrap().value,
        0.182_313,
        max_relative = 1e-4
    );
    assert_relative_eq!(
        sampled_only.employment.coefficient("intercept").unwrap().value,
        -0.419_620,
        max_relative = 1e-4
    );
}

#[test]
fn centroid_reference_values() {
    let points = uv_points(&load_table1()).unwrap();
    let centroids = phase_centroids(&points, &[(1981, 1994), (1995, 2009)]).unwrap();
    assert_eq!(centroids[0].n_points, 14);
    assert_eq!(centroids[1].n_points, 15);
    assert_relative_eq!(centroids[0].v, 88.514_285_714_285_72, max_relative = 1e-12);
    assert_relative_eq!(centroids[1].v, 92.193_333_333_333_34, max_relative = 1e-12);
    assert_relative_eq!(centroids[0].u, 85.771_428_571_428_57, max_relative = 1e-12);
    assert_relative_eq!(centroids[1].u, 86.146_666_666_666_69, max_relative = 1e-12);
}
