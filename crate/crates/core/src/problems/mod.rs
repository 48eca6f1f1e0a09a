//! BBOB problem instances with optional shift/rotation and evaluation
//! budgets.

mod functions;
pub mod transforms;

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use functions::{BbobFunction, Landscape, Peaks};

use crate::objective::Objective;
use crate::seed;
use crate::{Error, Result};

pub const LOWER: f64 = -5.0;
pub const UPPER: f64 = 5.0;

/// Orthogonality tolerance for rotation matrices.
const ORTHO_TOL: f64 = 1e-9;

/// Serializable description of a problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub function: BbobFunction,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
    /// Row-major `dim x dim` orthogonal matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<f64>>,
    #[serde(default = "default_lower")]
    pub lower: f64,
    #[serde(default = "default_upper")]
    pub upper: f64,
}

fn default_lower() -> f64 {
    LOWER
}

fn default_upper() -> f64 {
    UPPER
}

impl ProblemSpec {
    pub fn new(function: BbobFunction, dim: usize) -> ProblemSpec {
        ProblemSpec {
            function,
            dim,
            shift: None,
            rotation: None,
            lower: LOWER,
            upper: UPPER,
        }
    }

    pub fn is_transformed(&self) -> bool {
        self.shift.is_some() || self.rotation.is_some()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < self.function.min_dim() {
            return Err(Error::InvalidProblem(format!(
                "{} needs dim >= {}, got {}",
                self.function,
                self.function.min_dim(),
                self.dim
            )));
        }
        if !(self.lower < self.upper) {
            return Err(Error::InvalidProblem("lower bound must be below upper bound".into()));
        }
        if let Some(s) = &self.shift {
            if s.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: s.len() });
            }
            if s.iter().any(|v| !(self.lower..=self.upper).contains(v)) {
                return Err(Error::InvalidProblem("shift lies outside the bounds".into()));
            }
        }
        if let Some(r) = &self.rotation {
            if r.len() != self.dim * self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim * self.dim,
                    got: r.len(),
                });
            }
            let dev = orthogonality_error(r, self.dim);
            if dev > ORTHO_TOL {
                return Err(Error::InvalidProblem(format!(
                    "rotation is not orthogonal (max |R^T R - I| = {dev:e})"
                )));
            }
        }
        Ok(())
    }

    /// Maps a point from the search space into the frame of the base
    /// function: `z = R^T (x - shift)`.
    pub fn to_base_frame(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let centered: Vec<f64> = match &self.shift {
            Some(s) => x.iter().zip(s).map(|(a, b)| a - b).collect(),
            None => x.to_vec(),
        };
        match &self.rotation {
            None => centered,
            Some(r) => (0..d)
                .map(|j| (0..d).map(|i| r[i * d + j] * centered[i]).sum())
                .collect(),
        }
    }

    /// Inverse of [`ProblemSpec::to_base_frame`]: `x = R z + shift`.
    pub fn from_base_frame(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut x: Vec<f64> = match &self.rotation {
            None => z.to_vec(),
            Some(r) => (0..d)
                .map(|i| (0..d).map(|j| r[i * d + j] * z[j]).sum())
                .collect(),
        };
        if let Some(s) = &self.shift {
            for (a, b) in x.iter_mut().zip(s) {
                *a += b;
            }
        }
        x
    }

    /// Location of the global optimum in search-space coordinates.
    pub fn optimum(&self) -> Vec<f64> {
        self.from_base_frame(&self.function.optimum(self.dim))
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}d", self.function, self.dim)?;
        if self.is_transformed() {
            f.write_str("-sr")?;
        }
        Ok(())
    }
}

fn orthogonality_error(r: &[f64], d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let dot: f64 = (0..d).map(|i| r[i * d + a] * r[i * d + b]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

thread_local! {
    static THREAD_EVALUATIONS: Cell<u64> = const { Cell::new(0) };
}

/// True-function evaluations performed on the calling thread by any
/// [`Problem`], across all instances.
pub fn thread_evaluations() -> u64 {
    THREAD_EVALUATIONS.with(|c| c.get())
}

/// Function-evaluation accounting with optional hard budget.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounter {
    pub consumed: u64,
    pub budget: Option<u64>,
}

impl EvalCounter {
    pub fn with_budget(budget: u64) -> EvalCounter {
        EvalCounter { consumed: 0, budget: Some(budget) }
    }

    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b - self.consumed)
    }

    fn charge(&mut self) -> Result<()> {
        if let Some(budget) = self.budget {
            if self.consumed >= budget {
                return Err(Error::BudgetExhausted { budget });
            }
        }
        self.consumed += 1;
        Ok(())
    }
}

/// A ready-to-evaluate problem: spec, precomputed constants and counter.
#[derive(Debug, Clone)]
pub struct Problem {
    spec: ProblemSpec,
    landscape: Landscape,
    pub counter: EvalCounter,
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Problem> {
        spec.validate()?;
        let landscape = Landscape::new(spec.function, spec.dim);
        Ok(Problem { spec, landscape, counter: EvalCounter::default() })
    }

    pub fn with_budget(mut self, budget: u64) -> Problem {
        self.counter = EvalCounter::with_budget(budget);
        self
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn landscape(&self) -> &Landscape {
        &self.landscape
    }

    pub fn evaluations(&self) -> u64 {
        self.counter.consumed
    }

    pub fn reset_counter(&mut self) {
        self.counter.consumed = 0;
    }
}

impl Objective for Problem {
    fn dim(&self) -> usize {
        self.spec.dim
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if x.len() != self.spec.dim {
            return Err(Error::DimensionMismatch { expected: self.spec.dim, got: x.len() });
        }
        self.counter.charge()?;
        THREAD_EVALUATIONS.with(|c| c.set(c.get() + 1));
        Ok(self.landscape.value(&self.spec.to_base_frame(x)))
    }
}

const TRAIN_FUNCTIONS: [BbobFunction; 16] = {
    use BbobFunction::*;
    [
        Sphere,
        Ellipsoidal,
        Rastrigin,
        BucheRastrigin,
        LinearSlope,
        AttractiveSector,
        StepEllipsoidal,
        RosenbrockOriginal,
        RosenbrockRotated,
        EllipsoidalHighCond,
        Discus,
        BentCigar,
        SharpRidge,
        DifferentPowers,
        RastriginF15,
        Schwefel,
    ]
};

const TEST_FUNCTIONS: [BbobFunction; 8] = {
    use BbobFunction::*;
    [
        Weierstrass,
        Schaffers,
        SchaffersHighCond,
        CompositeGrieRosen,
        Gallagher101Peaks,
        Gallagher21Peaks,
        Katsuura,
        LunacekBiRastrigin,
    ]
};

pub const SPLIT_DIM: usize = 10;

/// The fixed 16/8 train/test split, 10-dimensional, untransformed.
pub fn make_split() -> (Vec<ProblemSpec>, Vec<ProblemSpec>) {
    make_split_with_dim(SPLIT_DIM)
}

pub fn make_split_with_dim(dim: usize) -> (Vec<ProblemSpec>, Vec<ProblemSpec>) {
    let train = TRAIN_FUNCTIONS.iter().map(|&f| ProblemSpec::new(f, dim)).collect();
    let test = TEST_FUNCTIONS.iter().map(|&f| ProblemSpec::new(f, dim)).collect();
    (train, test)
}

/// Out-of-distribution variants of the test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OodMode {
    #[serde(rename = "sr", alias = "shift_rotate_10d")]
    ShiftRotate10d,
    #[serde(rename = "30d", alias = "plain_30d")]
    Plain30d,
}

impl FromStr for OodMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "shift_rotate_10d" | "10d_sr" | "sr" => Ok(OodMode::ShiftRotate10d),
            "plain_30d" | "30d" => Ok(OodMode::Plain30d),
            _ => Err(Error::UnknownMode(s.to_string())),
        }
    }
}

pub fn apply_ood(p: &ProblemSpec, mode: OodMode, seed: u64) -> Result<ProblemSpec> {
    if p.is_transformed() {
        return Err(Error::InvalidProblem(format!("{p} is already transformed")));
    }
    match mode {
        OodMode::Plain30d => {
            let mut out = p.clone();
            out.dim = 30;
            out.validate()?;
            Ok(out)
        }
        OodMode::ShiftRotate10d => {
            let mut rng = seed::rng(seed::derive(
                seed,
                seed::Stream::Transform,
                p.function.id() as u64,
            ));
            let mut out = p.clone();
            out.shift = Some((0..p.dim).map(|_| rng.random_range(-4.0..=4.0)).collect());
            out.rotation = Some(random_rotation(p.dim, &mut rng));
            out.validate()?;
            Ok(out)
        }
    }
}

/// Haar-uniform orthogonal matrix (row-major): QR of a Gaussian matrix with
/// the signs of `R`'s diagonal folded into `Q`.
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            out.push(q[(i, j)]);
        }
    }
    out
}
