//! Latin hypercube sampling and the surrogate training dataset.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::objective::Objective;
use crate::problems::Problem;
use crate::seed;
use crate::{Error, Result};

/// Latin hypercube design: `n` points in `dim` dimensions. Every column
/// places exactly one point in each of the `n` equal strata of
/// `[lower, upper]`, jittered uniformly inside the stratum and permuted
/// independently per column.
pub fn lhs_sample<R: Rng + ?Sized>(
    dim: usize,
    n: usize,
    bounds: (f64, f64),
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let (lo, hi) = bounds;
    let width = (hi - lo) / n as f64;
    let mut points = vec![vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        strata.shuffle(rng);
        for (point, &s) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            point[j] = lo + (s as f64 + u) * width;
        }
    }
    points
}

pub fn lhs_sample_seeded(dim: usize, n: usize, bounds: (f64, f64), seed: u64) -> Vec<Vec<f64>> {
    lhs_sample(dim, n, bounds, &mut seed::rng(seed))
}

/// Affine map from the box `[lower, upper]^d` onto `[-1, 1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputNorm {
    pub lower: f64,
    pub upper: f64,
}

impl InputNorm {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let half = 0.5 * (self.upper - self.lower);
        x.iter().map(|v| (v - self.lower) / half - 1.0).collect()
    }

    pub fn invert(&self, u: &[f64]) -> Vec<f64> {
        let half = 0.5 * (self.upper - self.lower);
        u.iter().map(|v| (v + 1.0) * half + self.lower).collect()
    }
}

/// Min-max map of objective values onto `[0, 1]`. Degenerates to the
/// identity when every sample has the same value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputNorm {
    pub y_min: f64,
    pub y_max: f64,
}

impl OutputNorm {
    pub fn fit(ys: &[f64]) -> OutputNorm {
        let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        OutputNorm { y_min, y_max }
    }

    pub fn is_constant(&self) -> bool {
        !(self.y_max > self.y_min)
    }

    pub fn apply(&self, y: f64) -> f64 {
        if self.is_constant() {
            y
        } else {
            (y - self.y_min) / (self.y_max - self.y_min)
        }
    }

    pub fn invert(&self, t: f64) -> f64 {
        if self.is_constant() {
            t
        } else {
            t * (self.y_max - self.y_min) + self.y_min
        }
    }
}

/// Header fields of a persisted sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Header {
    dim: usize,
    n: usize,
    lower: f64,
    upper: f64,
    y_min: f64,
    y_max: f64,
    seed: u64,
}

/// Sampled `(x, f(x))` pairs with their normalisation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub x_norm: InputNorm,
    pub y_norm: OutputNorm,
    pub seed: u64,
}

impl SampleSet {
    /// Wraps raw samples, fitting the output normalisation on them.
    pub fn from_samples(
        xs: Vec<Vec<f64>>,
        ys: Vec<f64>,
        bounds: (f64, f64),
        seed: u64,
    ) -> Result<SampleSet> {
        if xs.len() != ys.len() {
            return Err(Error::Dataset(format!("{} inputs but {} targets", xs.len(), ys.len())));
        }
        if xs.len() < 2 {
            return Err(Error::Dataset("need at least two samples".into()));
        }
        let dim = xs[0].len();
        if xs.iter().any(|x| x.len() != dim) {
            return Err(Error::Dataset("ragged inputs".into()));
        }
        let y_norm = OutputNorm::fit(&ys);
        Ok(SampleSet {
            xs,
            ys,
            x_norm: InputNorm { lower: bounds.0, upper: bounds.1 },
            y_norm,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.xs.first().map_or(0, Vec::len)
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.x_norm.lower, self.x_norm.upper)
    }

    pub fn normalized_inputs(&self) -> Vec<Vec<f64>> {
        self.xs.iter().map(|x| self.x_norm.apply(x)).collect()
    }

    pub fn normalized_targets(&self) -> Vec<f64> {
        self.ys.iter().map(|&y| self.y_norm.apply(y)).collect()
    }

    /// Splits into (train, holdout) by a seeded permutation. Both halves keep
    /// the normalisation fitted on the full set.
    pub fn split(&self, holdout_fraction: f64, seed: u64) -> Result<(SampleSet, SampleSet)> {
        let n = self.len();
        let n_hold = ((n as f64) * holdout_fraction).round() as usize;
        if n_hold < 2 || n - n_hold < 2 {
            return Err(Error::Dataset(format!(
                "cannot split {n} samples with holdout fraction {holdout_fraction}"
            )));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut seed::rng(seed));
        let take = |ids: &[usize]| SampleSet {
            xs: ids.iter().map(|&i| self.xs[i].clone()).collect(),
            ys: ids.iter().map(|&i| self.ys[i]).collect(),
            x_norm: self.x_norm,
            y_norm: self.y_norm,
            seed: self.seed,
        };
        Ok((take(&idx[n_hold..]), take(&idx[..n_hold])))
    }

    /// CSV layout: a header row naming the metadata fields, one metadata
    /// row, a column-name row (`x0..x{d-1},y`), then one row per sample.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
        let h = Header {
            dim: self.dim(),
            n: self.len(),
            lower: self.x_norm.lower,
            upper: self.x_norm.upper,
            y_min: self.y_norm.y_min,
            y_max: self.y_norm.y_max,
            seed: self.seed,
        };
        out.serialize(h).map_err(csv_err)?;
        let mut cols: Vec<String> = (0..h.dim).map(|j| format!("x{j}")).collect();
        cols.push("y".into());
        out.write_record(&cols).map_err(csv_err)?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            row.push(y.to_string());
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<SampleSet> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(BufReader::new(File::open(path)?));
        let mut records = rdr.records();
        let mut next = || -> Result<csv::StringRecord> {
            records
                .next()
                .ok_or_else(|| Error::Dataset("truncated sample file".into()))?
                .map_err(csv_err)
        };
        let names = next()?;
        let values = next()?;
        let h: Header = values.deserialize(Some(&names)).map_err(csv_err)?;
        let _cols = next()?;
        let mut xs = Vec::with_capacity(h.n);
        let mut ys = Vec::with_capacity(h.n);
        for rec in records {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != h.dim + 1 {
                return Err(Error::Dataset(format!("row has {} fields, want {}", rec.len(), h.dim + 1)));
            }
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Dataset(e.to_string())))
                .collect::<Result<_>>()?;
            ys.push(vals[h.dim]);
            xs.push(vals[..h.dim].to_vec());
        }
        if xs.len() != h.n {
            return Err(Error::Dataset(format!("header says {} rows, found {}", h.n, xs.len())));
        }
        Ok(SampleSet {
            xs,
            ys,
            x_norm: InputNorm { lower: h.lower, upper: h.upper },
            y_norm: OutputNorm { y_min: h.y_min, y_max: h.y_max },
            seed: h.seed,
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Dataset(e.to_string())
}

/// Evaluates `problem` at `n` LHS points. These are the only true-function
/// evaluations the surrogate pipeline spends.
pub fn build_dataset(problem: &mut Problem, n: usize, seed: u64) -> Result<SampleSet> {
    let spec = problem.spec().clone();
    let xs = lhs_sample_seeded(spec.dim, n, spec.bounds(), seed);
    let ys = problem.evaluate_batch(&xs)?;
    SampleSet::from_samples(xs, ys, spec.bounds(), seed)
}
