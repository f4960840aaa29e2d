use super::NnError;

/// Mean squared error over all samples and outputs, with its gradient
/// `2(ŷ - y) / N` where `N` counts every scalar output.
pub fn mse_loss(predictions: &[[f64; 2]], targets: &[[f64; 2]]) -> Result<(f64, Vec<[f64; 2]>), NnError> {
    if predictions.len() != targets.len() || predictions.is_empty() {
        return Err(NnError::ShapeMismatch(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let n = (2 * predictions.len()) as f64;
    let mut loss = 0.0;
    let grad = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| {
            let e = [p[0] - y[0], p[1] - y[1]];
            loss += e[0] * e[0] + e[1] * e[1];
            [2.0 * e[0] / n, 2.0 * e[1] / n]
        })
        .collect();
    Ok((loss / n, grad))
}
