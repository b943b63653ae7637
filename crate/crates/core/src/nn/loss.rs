use super::NnError;

/// Probability clipping applied inside the loss.
pub const EPSILON: f64 = 1e-7;

/// Mean binary cross-entropy `-[y ln p + (1 - y) ln(1 - p)]` with `p`
/// clipped to `[EPSILON, 1 - EPSILON]`.
pub fn binary_cross_entropy(predictions: &[f64], labels: &[u8]) -> Result<f64, NnError> {
    if predictions.len() != labels.len() {
        return Err(NnError::LengthMismatch { expected: labels.len(), found: predictions.len() });
    }
    if predictions.is_empty() {
        return Err(NnError::EmptyInput);
    }
    let total: f64 = predictions.iter().zip(labels).map(|(&p, &y)| sample_loss(p, y)).sum();
    Ok(total / predictions.len() as f64)
}

pub(crate) fn sample_loss(p: f64, y: u8) -> f64 {
    let p = p.clamp(EPSILON, 1.0 - EPSILON);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}
