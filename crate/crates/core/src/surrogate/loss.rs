use crate::error::{Error, Result};

/// Value and per-prediction gradient of a batch loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub loss: f64,
    pub grads: Vec<f64>,
}

/// `(1/N) sum 1/2 (y - yhat)^2`.
pub fn mse_loss(y_true: &[f64], y_pred: &[f64]) -> Result<LossOutput> {
    if y_true.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), got: y_pred.len() });
    }
    let n = y_true.len() as f64;
    let mut loss = 0.0;
    let grads = y_true
        .iter()
        .zip(y_pred)
        .map(|(&y, &p)| {
            loss += 0.5 * (y - p) * (y - p);
            -(y - p) / n
        })
        .collect();
    Ok(LossOutput { loss: loss / n, grads })
}

fn sgn(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Order-correction term of every element of a batch sorted by true value
/// in descending order. Interior elements are bracketed by both neighbours;
/// the two ends only see their single neighbour.
pub fn order_correction(y_true: &[f64], y_pred: &[f64]) -> Vec<f64> {
    let n = y_true.len();
    (0..n)
        .map(|i| {
            let mut oc = 0.0;
            if i > 0 {
                oc += (y_true[i - 1] - y_pred[i]).abs();
            }
            if i + 1 < n {
                oc += (y_pred[i] - y_true[i + 1]).abs();
            }
            0.5 * oc
        })
        .collect()
}

/// Relative-order-aware loss `(1/N) sum [lambda * 1/2 (y - yhat)^2 + OC]` on a
/// batch sorted by true value, descending.
pub fn roa_loss(y_true: &[f64], y_pred: &[f64], lambda: f64) -> Result<LossOutput> {
    let n = y_true.len();
    if n < 2 {
        return Err(Error::BatchTooSmall(n));
    }
    if y_pred.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y_pred.len() });
    }
    let oc = order_correction(y_true, y_pred);
    let nf = n as f64;
    let mut loss = 0.0;
    let mut grads = vec![0.0; n];
    for i in 0..n {
        let r = y_true[i] - y_pred[i];
        loss += lambda * 0.5 * r * r + oc[i];
        let mut g = -lambda * r;
        if i > 0 {
            g += 0.5 * sgn(y_pred[i] - y_true[i - 1]);
        }
        if i + 1 < n {
            g += 0.5 * sgn(y_pred[i] - y_true[i + 1]);
        }
        grads[i] = g / nf;
    }
    Ok(LossOutput { loss: loss / nf, grads })
}

/// `lambda` after finishing `epoch` (1-based) of the ROA phase.
pub fn lambda_schedule(lambda: f64, epoch: usize, t_mix: usize) -> f64 {
    let factor = 1.0 - epoch as f64 / t_mix as f64;
    if factor <= 0.0 {
        0.0
    } else {
        lambda * factor
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap().loss, 0.0);
        assert_eq!(mse_loss(&[1.0], &[0.0]).unwrap().loss, 0.5);
        assert!(matches!(mse_loss(&[], &[]), Err(Error::EmptyBatch)));
    }

    #[test]
    fn misordered_pair_oc() {
        let t = [9.0, 5.1, 5.0, 3.0, 1.0];
        let p = [9.0, 5.0, 5.1, 3.0, 1.0];
        assert_eq!(order_correction(&t, &p)[1], 2.0);
    }

    #[test]
    fn roa_rejects_tiny_batches() {
        assert!(matches!(roa_loss(&[1.0], &[1.0], 1.0), Err(Error::BatchTooSmall(1))));
    }

    #[test]
    fn lambda_examples() {
        assert!((lambda_schedule(1.0, 1, 1000) - 0.999).abs() < 1e-15);
        assert_eq!(lambda_schedule(0.3, 1000, 1000), 0.0);
        assert_eq!(lambda_schedule(0.3, 1200, 1000), 0.0);
    }
}
