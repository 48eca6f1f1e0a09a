//! Small feed-forward networks with hand-written backpropagation.
//!
//! All three architectures store their parameters in one flat vector and
//! expose the same [`Network`] interface. `forward` returns a [`Tape`] that
//! is bound to the exact parameter values it saw; mutating the parameters
//! through [`Network::params_mut`] invalidates every outstanding tape.

mod checkpoint;
mod kan;
mod mlp;
mod optim;
mod rbf;
pub mod spline;

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checkpoint::{Architecture, Checkpoint, CHECKPOINT_VERSION};
pub use kan::{kan_edge, silu, silu_prime, KanInit, KanNetwork};
pub use mlp::MlpNetwork;
pub use optim::{Adam, Optimizer, OptimizerKind, Sgd};
pub use rbf::RbfNetwork;
pub use spline::{spline_basis, spline_basis_derivative, SplineGrid};

static STAMPS: AtomicU64 = AtomicU64::new(1);

fn next_stamp() -> u64 {
    STAMPS.fetch_add(1, Ordering::Relaxed)
}

/// Named slices of a parameter vector that can be frozen independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamGroup {
    SplineCoeffs,
    BaseWeights,
    SplineWeights,
    Weights,
    Biases,
    Centers,
    Widths,
}

/// Flat parameter storage shared by all architectures.
#[derive(Debug, Clone)]
pub struct Params {
    values: Vec<f64>,
    stamp: u64,
    layout: Vec<(ParamGroup, Range<usize>)>,
    frozen: Vec<ParamGroup>,
}

impl Params {
    pub(crate) fn new(values: Vec<f64>, layout: Vec<(ParamGroup, Range<usize>)>) -> Params {
        Params { values, stamp: next_stamp(), layout, frozen: Vec::new() }
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    fn values_mut(&mut self) -> &mut [f64] {
        self.stamp = next_stamp();
        &mut self.values
    }

    fn mask(&self, grads: &mut [f64]) {
        for (group, range) in &self.layout {
            if self.frozen.contains(group) {
                grads[range.clone()].iter_mut().for_each(|g| *g = 0.0);
            }
        }
    }
}

/// Activations recorded by a forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    stamp: u64,
    inner: TapeInner,
}

#[doc(hidden)]
#[derive(Debug, Clone)]
pub enum TapeInner {
    Kan(kan::KanTape),
    Mlp(mlp::MlpTape),
    Rbf(rbf::RbfTape),
}

/// Parameter and input gradients from one backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

/// Common interface of the three architectures.
pub trait Network: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn architecture(&self) -> Architecture;

    #[doc(hidden)]
    fn store(&self) -> &Params;
    #[doc(hidden)]
    fn store_mut(&mut self) -> &mut Params;
    #[doc(hidden)]
    fn forward_inner(&self, x: &[f64]) -> (Vec<f64>, TapeInner);
    /// Accumulates parameter gradients into `grads` and returns the input
    /// gradient.
    #[doc(hidden)]
    fn backward_inner(&self, tape: &TapeInner, dy: &[f64], grads: &mut [f64]) -> Result<Vec<f64>>;

    fn params(&self) -> &[f64] {
        self.store().values()
    }

    /// Mutable parameter access; invalidates outstanding tapes.
    fn params_mut(&mut self) -> &mut [f64] {
        self.store_mut().values_mut()
    }

    fn n_params(&self) -> usize {
        self.params().len()
    }

    fn param_groups(&self) -> Vec<(ParamGroup, Range<usize>)> {
        self.store().layout.clone()
    }

    fn set_frozen(&mut self, group: ParamGroup, frozen: bool) {
        let p = self.store_mut();
        p.frozen.retain(|g| *g != group);
        if frozen {
            p.frozen.push(group);
        }
    }

    fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Tape)> {
        check_dim(self.input_dim(), x.len())?;
        let (y, inner) = self.forward_inner(x);
        Ok((y, Tape { stamp: self.store().stamp, inner }))
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x.len())?;
        Ok(self.forward_inner(x).0)
    }

    /// Adds this sample's parameter gradient into `grads` (frozen groups stay
    /// zero) and returns the input gradient.
    fn backward_accumulate(&self, tape: &Tape, dy: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        if tape.stamp != self.store().stamp {
            return Err(Error::StaleTape);
        }
        check_dim(self.output_dim(), dy.len())?;
        check_dim(self.n_params(), grads.len())?;
        let dx = self.backward_inner(&tape.inner, dy, grads)?;
        self.store().mask(grads);
        Ok(dx)
    }

    fn backward(&self, tape: &Tape, dy: &[f64]) -> Result<Gradients> {
        let mut params = vec![0.0; self.n_params()];
        let input = self.backward_accumulate(tape, dy, &mut params)?;
        Ok(Gradients { params, input })
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Any of the three architectures behind one concrete type.
#[derive(Debug, Clone)]
pub enum Model {
    Kan(KanNetwork),
    Mlp(MlpNetwork),
    Rbf(RbfNetwork),
}

macro_rules! delegate {
    ($self:ident, $n:ident => $e:expr) => {
        match $self {
            Model::Kan($n) => $e,
            Model::Mlp($n) => $e,
            Model::Rbf($n) => $e,
        }
    };
}

impl Network for Model {
    fn input_dim(&self) -> usize {
        delegate!(self, n => n.input_dim())
    }
    fn output_dim(&self) -> usize {
        delegate!(self, n => n.output_dim())
    }
    fn architecture(&self) -> Architecture {
        delegate!(self, n => n.architecture())
    }
    fn store(&self) -> &Params {
        delegate!(self, n => n.store())
    }
    fn store_mut(&mut self) -> &mut Params {
        delegate!(self, n => n.store_mut())
    }
    fn forward_inner(&self, x: &[f64]) -> (Vec<f64>, TapeInner) {
        delegate!(self, n => n.forward_inner(x))
    }
    fn backward_inner(&self, tape: &TapeInner, dy: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        delegate!(self, n => n.backward_inner(tape, dy, grads))
    }
}

impl Model {
    /// Rebuilds a network from its descriptor and flat parameters.
    pub fn from_parts(arch: &Architecture, params: Vec<f64>) -> Result<Model> {
        let model = match arch {
            Architecture::Kan { shape, grid, degree } => {
                Model::Kan(KanNetwork::zeros(shape, *grid, *degree)?)
            }
            Architecture::Mlp { shape } => Model::Mlp(MlpNetwork::zeros(shape)?),
            Architecture::Rbf { dim, centers } => Model::Rbf(RbfNetwork::zeros(*dim, *centers)?),
        };
        let mut model = model;
        if params.len() != model.n_params() {
            return Err(Error::Checkpoint(format!(
                "parameter count {} does not match architecture ({})",
                params.len(),
                model.n_params()
            )));
        }
        model.params_mut().copy_from_slice(&params);
        Ok(model)
    }
}

impl From<KanNetwork> for Model {
    fn from(n: KanNetwork) -> Model {
        Model::Kan(n)
    }
}

impl From<MlpNetwork> for Model {
    fn from(n: MlpNetwork) -> Model {
        Model::Mlp(n)
    }
}

impl From<RbfNetwork> for Model {
    fn from(n: RbfNetwork) -> Model {
        Model::Rbf(n)
    }
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.len() < 2 || shape.iter().any(|&d| d == 0) {
        return Err(Error::InvalidConfig(format!("invalid layer shape {shape:?}")));
    }
    Ok(())
}
