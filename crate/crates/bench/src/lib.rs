//! Shared fixtures for the benchmarks.

use levykb_core::{LevyMeasure, LevyMeasureSpec};

/// The four built-in presets with their names.
pub fn presets() -> Vec<(&'static str, LevyMeasure)> {
    [
        ("cauchy", LevyMeasureSpec::cauchy()),
        ("stable_1.5", LevyMeasureSpec::stable(1.5)),
        ("dyadic_1_1", LevyMeasureSpec::dyadic(1.0, 1.0)),
        ("oscillating", LevyMeasureSpec::oscillating(0.8, 1.6)),
    ]
    .into_iter()
    .map(|(name, spec)| (name, LevyMeasure::new(spec).expect("preset is valid")))
    .collect()
}
