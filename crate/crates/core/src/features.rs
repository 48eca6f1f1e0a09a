//! The 9-dimensional optimisation state observed by the policy.
//!
//! * `s1..s3` describe the spread of the population,
//! * `s4..s6` relate fitness to distance from the best points and measure
//!   the latest improvement,
//! * `s7..s9` locate the run in time.
//!
//! Every feature is dimension-free so a policy trained on one dimension can
//! be applied to another.

use serde::{Deserialize, Serialize};

use crate::de::Population;

pub const STATE_DIM: usize = 9;
pub const EPS: f64 = 1e-12;

pub type OptState = [f64; STATE_DIM];

/// Run-level bookkeeping that the population alone does not carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunProgress {
    pub fes: u64,
    pub max_fes: u64,
    pub stagnation_gens: usize,
    pub total_gens: usize,
    pub y_init: f64,
    pub y_prev: f64,
    pub y_now: f64,
    pub x_best: Vec<f64>,
}

impl RunProgress {
    pub fn start(pop: &Population, fes: u64, max_fes: u64, total_gens: usize) -> RunProgress {
        RunProgress {
            fes,
            max_fes,
            stagnation_gens: 0,
            total_gens,
            y_init: pop.best_y,
            y_prev: pop.best_y,
            y_now: pop.best_y,
            x_best: pop.best_x.clone(),
        }
    }

    /// Records the outcome of one generation.
    pub fn advance(&mut self, pop: &Population, fes: u64) {
        self.fes = fes;
        self.y_prev = self.y_now;
        if pop.best_y < self.y_now {
            self.y_now = pop.best_y;
            self.x_best = pop.best_x.clone();
            self.stagnation_gens = 0;
        } else {
            self.stagnation_gens += 1;
        }
    }
}

/// Interface for swapping in other state definitions.
pub trait FeatureExtractor: Send + Sync {
    fn extract(&self, pop: &Population, progress: &RunProgress) -> OptState;
}

/// Default extractor implementing the nine features below.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultFeatures;

impl FeatureExtractor for DefaultFeatures {
    fn extract(&self, pop: &Population, progress: &RunProgress) -> OptState {
        extract_state(pop, progress)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Pearson correlation; 0 when either side has no spread.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let denom = (saa * sbb).sqrt();
    if !(denom > EPS) || !denom.is_finite() {
        return 0.0;
    }
    (sab / denom).clamp(-1.0, 1.0)
}

pub fn extract_state(pop: &Population, progress: &RunProgress) -> OptState {
    let np = pop.np();
    let dim = pop.dim();
    let diameter = (pop.upper - pop.lower) * (dim as f64).sqrt();

    let mut pair_sum = 0.0;
    for i in 0..np {
        for j in i + 1..np {
            pair_sum += dist(&pop.xs[i], &pop.xs[j]);
        }
    }
    let pairs = (np * (np - 1) / 2).max(1) as f64;
    let s1 = (pair_sum / pairs / diameter).clamp(0.0, 1.0);

    let ymax = pop.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ymin = pop.ys.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = pop.mean_y();
    let std = (pop.ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / np as f64).sqrt();
    let s2 = finite_or_zero(std / (ymax - ymin + EPS)).clamp(0.0, 1.0);

    let mut centroid = vec![0.0; dim];
    for x in &pop.xs {
        for (c, v) in centroid.iter_mut().zip(x) {
            *c += v;
        }
    }
    centroid.iter_mut().for_each(|c| *c /= np as f64);
    let best = &pop.xs[pop.best_idx];
    let s3 = (dist(&centroid, best) / diameter).clamp(0.0, 1.0);

    let d_pop: Vec<f64> = pop.xs.iter().map(|x| dist(x, best)).collect();
    let d_run: Vec<f64> = pop.xs.iter().map(|x| dist(x, &progress.x_best)).collect();
    let s4 = pearson(&pop.ys, &d_pop);
    let s5 = pearson(&pop.ys, &d_run);
    let s6 = finite_or_zero((progress.y_prev - progress.y_now) / (progress.y_prev.abs() + EPS)).clamp(-1.0, 1.0);

    let s7 = (progress.fes as f64 / progress.max_fes as f64).clamp(0.0, 1.0);
    let s8 = (progress.stagnation_gens as f64 / progress.total_gens.max(1) as f64).clamp(0.0, 1.0);
    let gain = progress.y_init - progress.y_now;
    // written so it stays monotone in `gain` after rounding
    let s9 = finite_or_zero(1.0 - EPS / (gain.max(0.0) + EPS)).clamp(0.0, 1.0);

    [s1, s2, s3, s4, s5, s6, s7, s8, s9]
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}
