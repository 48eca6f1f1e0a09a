use std::io::Write;

use serde::Serialize;

use super::TrainedSurrogate;
use crate::error::{Error, Result};
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandscapeRow {
    pub x1: f64,
    pub x2: f64,
    pub f_true: f64,
    pub f_pred: f64,
}

/// Evaluates truth and surrogate on a `resolution x resolution` grid over
/// the surrogate's input box. 2D only.
pub fn landscape_grid<O: Objective + ?Sized>(
    truth: &mut O,
    surrogate: &TrainedSurrogate,
    resolution: usize,
) -> Result<Vec<LandscapeRow>> {
    if truth.dim() != 2 || surrogate.model_dim() != 2 {
        return Err(Error::InvalidConfig("landscape export needs a 2D problem".into()));
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig("landscape resolution must be at least 2".into()));
    }
    let (lo, hi) = (surrogate.x_norm.lower, surrogate.x_norm.upper);
    let step = (hi - lo) / (resolution - 1) as f64;
    let mut rows = Vec::with_capacity(resolution * resolution);
    for a in 0..resolution {
        for b in 0..resolution {
            let x = [lo + a as f64 * step, lo + b as f64 * step];
            rows.push(LandscapeRow { x1: x[0], x2: x[1], f_true: truth.evaluate(&x)?, f_pred: surrogate.predict(&x)? });
        }
    }
    Ok(rows)
}

pub fn write_landscape_csv<W: Write>(rows: &[LandscapeRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Dataset(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

impl TrainedSurrogate {
    fn model_dim(&self) -> usize {
        use crate::networks::Network;
        self.model.input_dim()
    }
}
