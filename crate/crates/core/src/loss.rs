use crate::{Error, Result};

/// Mean of squared differences.
pub fn mse_loss(preds: &[f64], targets: &[f64]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::Argument(
            "mse_loss needs at least one prediction".into(),
        ));
    }
    if preds.len() != targets.len() {
        return Err(Error::Shape {
            context: "mse_loss",
            expected: preds.len(),
            found: targets.len(),
        });
    }
    let sum: f64 = preds
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / preds.len() as f64)
}
