//! The classic Anscombe quartet, embedded as fixtures.
//!
//! Four visually distinct 11-point datasets sharing the same means,
//! variances, slope, intercept, and coefficient of determination. The
//! values are kept exactly as originally published (x to one decimal,
//! y to two), in the original row order.

use crate::constraints::ConstraintSet;
use crate::data::DatasetPair;

pub const LABELS: [&str; 4] = ["I", "II", "III", "IV"];

/// Shared x column of datasets I-III.
pub const X_COMMON: [f64; 11] = [
    10.0, 8.0, 13.0, 9.0, 11.0, 14.0, 6.0, 4.0, 12.0, 7.0, 5.0,
];

/// x column of dataset IV: ten 8s and one 19.
pub const X_IV: [f64; 11] = [8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 19.0, 8.0, 8.0, 8.0];

pub const Y_I: [f64; 11] = [
    8.04, 6.95, 7.58, 8.81, 8.33, 9.96, 7.24, 4.26, 10.84, 4.82, 5.68,
];

pub const Y_II: [f64; 11] = [
    9.14, 8.14, 8.74, 8.77, 9.26, 8.10, 6.13, 3.10, 9.13, 7.26, 4.74,
];

pub const Y_III: [f64; 11] = [
    7.46, 6.77, 12.74, 7.11, 7.81, 8.84, 6.08, 5.39, 8.15, 6.42, 5.73,
];

pub const Y_IV: [f64; 11] = [
    6.58, 5.76, 7.71, 8.84, 8.47, 7.04, 5.25, 12.50, 5.56, 7.91, 6.89,
];

/// One quartet member, 0-based (0 => I, ..., 3 => IV).
///
/// # Panics
/// Panics if `index > 3`.
pub fn dataset(index: usize) -> DatasetPair {
    let (xs, ys) = match index {
        0 => (X_COMMON, Y_I),
        1 => (X_COMMON, Y_II),
        2 => (X_COMMON, Y_III),
        3 => (X_IV, Y_IV),
        _ => panic!("quartet index {index} out of range 0..=3"),
    };
    DatasetPair::new(xs.to_vec(), ys.to_vec()).expect("embedded fixture is valid")
}

/// All four members in order.
pub fn datasets() -> Vec<DatasetPair> {
    (0..4).map(dataset).collect()
}

/// The constraint set all four members satisfy:
/// n = 11, x̄ = 9, σx² = 11, ȳ = 7.5, σy² = 4.125, β1 = 0.5.
pub fn constraints() -> ConstraintSet {
    ConstraintSet::new(11, 9.0, 11.0, 7.5, 4.125, 0.5).expect("classic constraints are feasible")
}

/// Verification tolerance appropriate for the published values, which are
/// rounded to two decimals.
pub const HISTORICAL_TOLERANCE: f64 = 1e-2;
