//! Consistency of the distribution fit: estimates must move toward the
//! truth as the sample grows.

use growth_cycles::fit::{fit_gpd, FitConfig};
use growth_cycles::gpd::GpdParams;

#[test]
fn errors_shrink_from_1e4_to_1e6_samples() {
    let truth = GpdParams::new(0.34, 7.5, 2.8).unwrap();
    let config = FitConfig::default();
    let mut non_increasing = 0;
    for seed in 0..20u64 {
        let small = fit_gpd(&truth.sample(10_000, seed), &config).unwrap();
        let large = fit_gpd(&truth.sample(1_000_000, seed), &config).unwrap();
        let err = |r: &growth_cycles::fit::GpdFitReport| {
            (r.b - 0.34).abs() / 0.34 + (r.alpha - 2.8).abs() / 2.8
        };
        if err(&large) <= err(&small) {
            non_increasing += 1;
        }
    }
    assert!(
        non_increasing >= 19,
        "error non-increasing in only {non_increasing} of 20 seeded trials"
    );
}
