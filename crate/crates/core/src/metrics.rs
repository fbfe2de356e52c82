//! Classification accuracy.

use crate::error::{Error, Result};

/// Percentage of predictions equal to the ground truth.
pub fn evaluate(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "prediction count",
            expected: truth.len(),
            found: predictions.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidInput("no samples to evaluate".into()));
    }
    let correct = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(100.0 * correct as f64 / truth.len() as f64)
}

/// Rounds to one decimal place, the precision accuracies are reported at.
pub fn round_one_decimal(value: f64) -> f64 {
    (value * 10.0).round() / 10.0
}
