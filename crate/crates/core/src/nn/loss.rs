use ndarray::{Array2, Axis, Zip};

use crate::error::{Error, Result};

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Column-wise softmax, shifted by the column max.
pub fn softmax(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let max = col.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        col.mapv_inplace(|v| (v - max).exp());
        let sum = col.sum();
        col.mapv_inplace(|v| v / sum);
    }
    out
}

/// Column-wise `log softmax`.
pub fn log_softmax(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let max = col.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + col.fold(0.0, |acc, &v| acc + (v - max).exp()).ln();
        col.mapv_inplace(|v| v - lse);
    }
    out
}

fn same_shape(a: &Array2<f64>, b: &Array2<f64>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `½ Σ (pred - label)²` over every entry.
pub fn loss_mse(pred: &Array2<f64>, label: &Array2<f64>) -> Result<f64> {
    same_shape(pred, label)?;
    Ok(0.5
        * Zip::from(pred)
            .and(label)
            .fold(0.0, |acc, &p, &y| acc + (p - y) * (p - y)))
}

/// `-Σ y log p`, summed over the columns of a batch.
pub fn loss_softmax_ce(p: &Array2<f64>, y: &Array2<f64>) -> Result<f64> {
    same_shape(p, y)?;
    let mut total = 0.0;
    for (pc, yc) in p.axis_iter(Axis(1)).zip(y.axis_iter(Axis(1))) {
        for (&pi, &yi) in pc.iter().zip(yc.iter()) {
            if yi == 0.0 {
                continue;
            }
            if pi <= 0.0 {
                return Err(Error::DomainError(format!("probability {pi} at a labelled class")));
            }
            total -= yi * pi.ln();
        }
    }
    Ok(total)
}

/// Index of the largest entry of every column (first one on ties).
pub fn argmax_columns(a: &Array2<f64>) -> Vec<usize> {
    a.axis_iter(Axis(1))
        .map(|col| {
            col.iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |best, (i, &v)| if v > best.1 { (i, v) } else { best },
                )
                .0
        })
        .collect()
}

/// `classes × labels.len()` one-hot matrix.
pub fn one_hot(labels: &[usize], classes: usize) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((classes, labels.len()));
    for (j, &c) in labels.iter().enumerate() {
        if c >= classes {
            return Err(Error::DomainError(format!("label {c} with {classes} classes")));
        }
        out[[c, j]] = 1.0;
    }
    Ok(out)
}
