//! Surrogate learning: MSE warm-up followed by relative-order-aware
//! training, plus order metrics and landscape export.

mod landscape;
mod loss;
mod metrics;

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::networks::{Checkpoint, Model, Network, Optimizer, OptimizerKind};
use crate::objective::Objective;
use crate::sampling::{InputNorm, OutputNorm, SampleSet};
use crate::seed;

pub use landscape::{landscape_grid, write_landscape_csv, LandscapeRow};
pub use loss::{lambda_schedule, mse_loss, order_correction, roa_loss, LossOutput};
pub use metrics::{concordance, pairwise_order_accuracy};

/// Loss used in the second training phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    #[default]
    Roa,
    /// Second phase keeps the MSE loss for the same number of epochs.
    Mse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlsConfig {
    pub batch_size: usize,
    pub mse_epochs: usize,
    pub roa_epochs: usize,
    pub lr: f64,
    /// Decay horizon of lambda; defaults to `roa_epochs`.
    pub t_mix: Option<usize>,
    pub lambda_init: f64,
    pub loss: LossMode,
    pub optimizer: OptimizerKind,
}

impl Default for SlsConfig {
    fn default() -> Self {
        SlsConfig {
            batch_size: 100,
            mse_epochs: 300,
            roa_epochs: 1000,
            lr: 0.01,
            t_mix: None,
            lambda_init: 1.0,
            loss: LossMode::Roa,
            optimizer: OptimizerKind::Adam,
        }
    }
}

impl SlsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || !(self.lr > 0.0) || self.lambda_init < 0.0 || self.t_mix == Some(0) {
            return Err(Error::InvalidConfig(format!("invalid surrogate config {self:?}")));
        }
        Ok(())
    }

    pub fn t_mix(&self) -> usize {
        self.t_mix.unwrap_or(self.roa_epochs).max(1)
    }
}

/// One row of the per-epoch training curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub phase: String,
    pub mse: f64,
    pub oc: f64,
    pub lambda: f64,
    pub order_acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SurrogateMeta {
    pub problem: String,
    pub seed: u64,
    pub final_mse: f64,
    pub final_oc: f64,
    pub order_accuracy: Option<f64>,
    pub samples: usize,
}

/// A trained network wrapped with the normalisation of its dataset.
#[derive(Debug, Clone)]
pub struct TrainedSurrogate {
    pub model: Model,
    pub x_norm: InputNorm,
    pub y_norm: OutputNorm,
    pub meta: SurrogateMeta,
    pub history: Vec<EpochRecord>,
}

impl TrainedSurrogate {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let y = self.model.predict(&self.x_norm.apply(x))?;
        Ok(self.y_norm.invert(y[0]))
    }

    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::of(&self.model);
        ck.input_norm = Some(self.x_norm);
        ck.output_norm = Some(self.y_norm);
        if let Ok(serde_json::Value::Object(m)) = serde_json::to_value(&self.meta) {
            ck.meta = m;
        }
        ck
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.checkpoint().save(path)
    }

    pub fn load(path: &Path) -> Result<TrainedSurrogate> {
        let ck = Checkpoint::load(path)?;
        let (Some(x_norm), Some(y_norm)) = (ck.input_norm, ck.output_norm) else {
            return Err(Error::Checkpoint("surrogate checkpoint lacks normalisation".into()));
        };
        let meta = serde_json::from_value(serde_json::Value::Object(ck.meta.clone())).unwrap_or_default();
        Ok(TrainedSurrogate { model: ck.model()?, x_norm, y_norm, meta, history: Vec::new() })
    }

    /// Per-epoch CSV: `epoch,phase,mse,oc,lambda,order_acc`.
    pub fn write_history_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["epoch", "phase", "mse", "oc", "lambda", "order_acc"]).map_err(csv_err)?;
        for r in &self.history {
            out.write_record([
                r.epoch.to_string(),
                r.phase.clone(),
                r.mse.to_string(),
                r.oc.to_string(),
                r.lambda.to_string(),
                r.order_acc.map_or(String::new(), |v| v.to_string()),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_history(&self, path: &Path) -> Result<()> {
        self.write_history_csv(fs::File::create(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Dataset(e.to_string())
}

impl Objective for TrainedSurrogate {
    fn dim(&self) -> usize {
        self.model.input_dim()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        self.predict(x)
    }
}

/// Pairwise order accuracy of `model` on `holdout`.
pub fn order_accuracy(model: &TrainedSurrogate, holdout: &SampleSet) -> Result<f64> {
    let pred = model.predict_batch(&holdout.xs)?;
    Ok(pairwise_order_accuracy(&holdout.ys, &pred))
}

/// Splits `0..n` (already shuffled) into batches, folding a trailing batch
/// of one into its predecessor so every batch has at least two elements.
fn batches(order: &[usize], size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = order.chunks(size).collect();
    if out.len() > 1 && out.last().map_or(false, |b| b.len() < 2) {
        let n = order.len();
        out.pop();
        let start = (out.len() - 1) * size;
        *out.last_mut().unwrap() = &order[start..n];
    }
    out
}

/// Two-phase training: `mse_epochs` of minibatch MSE, then `roa_epochs`
/// where every batch is sorted by true value (descending, ties by sample
/// index) and the order-aware loss is applied with a decaying MSE weight.
///
/// `holdout`, when given, is only used for the per-epoch order accuracy.
pub fn train_surrogate(
    dataset: &SampleSet,
    holdout: Option<&SampleSet>,
    mut net: Model,
    cfg: &SlsConfig,
    seed: u64,
) -> Result<TrainedSurrogate> {
    cfg.validate()?;
    if net.input_dim() != dataset.dim() {
        return Err(Error::DimensionMismatch { expected: net.input_dim(), got: dataset.dim() });
    }
    let xs = dataset.normalized_inputs();
    let ys = dataset.normalized_targets();
    let n = xs.len();
    let mut rng = seed::rng(seed);
    let mut opt = Optimizer::new(cfg.optimizer, net.n_params(), cfg.lr);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grads = vec![0.0; net.n_params()];
    let mut params = net.params().to_vec();
    let mut history = Vec::with_capacity(cfg.mse_epochs + cfg.roa_epochs);
    let mut lambda = cfg.lambda_init;
    let t_mix = cfg.t_mix();
    let mut surrogate = TrainedSurrogate {
        model: net.clone(),
        x_norm: dataset.x_norm,
        y_norm: dataset.y_norm,
        meta: SurrogateMeta { seed, samples: n, ..Default::default() },
        history: Vec::new(),
    };

    let total = cfg.mse_epochs + cfg.roa_epochs;
    for epoch in 1..=total {
        let roa_epoch = epoch.checked_sub(cfg.mse_epochs).filter(|&e| e > 0);
        let use_roa = roa_epoch.is_some() && cfg.loss == LossMode::Roa;
        order.shuffle(&mut rng);
        let (mut mse_sum, mut oc_sum) = (0.0, 0.0);
        for batch in batches(&order, cfg.batch_size) {
            let mut idx = batch.to_vec();
            idx.sort_by(|&a, &b| ys[b].total_cmp(&ys[a]).then(a.cmp(&b)));
            let mut preds = Vec::with_capacity(idx.len());
            let mut tapes = Vec::with_capacity(idx.len());
            for &i in &idx {
                let (y, tape) = net.forward(&xs[i])?;
                preds.push(y[0]);
                tapes.push(tape);
            }
            let truth: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
            let mse = mse_loss(&truth, &preds)?;
            mse_sum += mse.loss * idx.len() as f64;
            oc_sum += order_correction(&truth, &preds).iter().sum::<f64>();
            let step = if use_roa && idx.len() >= 2 { roa_loss(&truth, &preds, lambda)? } else { mse };
            if !step.loss.is_finite() {
                return Err(Error::Diverged { epoch, detail: format!("batch loss {}", step.loss) });
            }
            grads.iter_mut().for_each(|g| *g = 0.0);
            for (tape, g) in tapes.iter().zip(&step.grads) {
                net.backward_accumulate(tape, &[*g], &mut grads)?;
            }
            opt.step(&mut params, &grads)?;
            net.params_mut().copy_from_slice(&params);
        }
        let mse = mse_sum / n as f64;
        let oc = oc_sum / n as f64;
        if !mse.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged { epoch, detail: format!("mse {mse}") });
        }
        let lambda_used = if use_roa { lambda } else { 1.0 };
        if let (true, Some(e)) = (use_roa, roa_epoch) {
            lambda = lambda_schedule(lambda, e, t_mix);
        }
        let order_acc = match holdout {
            Some(h) => {
                surrogate.model = net.clone();
                Some(order_accuracy(&surrogate, h)?)
            }
            None => None,
        };
        history.push(EpochRecord {
            epoch,
            phase: if use_roa { "roa".into() } else { "mse".into() },
            mse,
            oc,
            lambda: lambda_used,
            order_acc,
        });
    }

    surrogate.model = net;
    if let Some(last) = history.last() {
        surrogate.meta.final_mse = last.mse;
        surrogate.meta.final_oc = last.oc;
    }
    surrogate.meta.order_accuracy = match holdout {
        Some(h) => Some(order_accuracy(&surrogate, h)?),
        None => None,
    };
    surrogate.history = history;
    Ok(surrogate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_never_leave_a_singleton() {
        let order: Vec<usize> = (0..201).collect();
        let b = batches(&order, 100);
        assert_eq!(b.len(), 2);
        assert_eq!(b[1].len(), 101);
        let order: Vec<usize> = (0..1).collect();
        assert_eq!(batches(&order, 100).len(), 1);
    }
}
