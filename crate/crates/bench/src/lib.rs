//! Shared fixtures for the benchmarks.

use judgecal_core::calibrate::CalibrationItem;
use judgecal_core::data::{generate_synthetic, group_by_item, GeneratorConfig};
use judgecal_core::{compute_features, DavidsonParams, Smoothing};

/// Calibration items drawn from the default generator at `theta`.
pub fn calibration_fixture(num_items: usize, theta: DavidsonParams, seed: u64) -> Vec<CalibrationItem> {
    let cfg = GeneratorConfig {
        theta_true: theta,
        num_items,
        seed,
        ..Default::default()
    };
    let data = generate_synthetic(&cfg).expect("valid generator config");
    group_by_item(data.records)
        .iter()
        .zip(&data.labels)
        .map(|(votes, label)| CalibrationItem {
            features: compute_features(&votes.counts().expect("non-empty item"), &cfg.smoothing),
            truth: label.truth,
        })
        .collect()
}

/// Every tally with `n` votes.
pub fn all_tallies(n: u32) -> Vec<judgecal_core::VoteCounts> {
    (0..=n)
        .flat_map(|plus| (0..=n - plus).map(move |minus| (plus, minus)))
        .map(|(plus, minus)| judgecal_core::VoteCounts::new(plus, minus, n - plus - minus).expect("n >= 1"))
        .collect()
}

pub fn default_smoothing() -> Smoothing {
    Smoothing::default()
}
