use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{check_shape, Architecture, Network, ParamGroup, Params, TapeInner};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct LayerLayout {
    n_in: usize,
    n_out: usize,
    w: usize,
    b: usize,
}

/// Fully connected network, ReLU on hidden layers and a linear output.
#[derive(Debug, Clone)]
pub struct MlpNetwork {
    shape: Vec<usize>,
    layers: Vec<LayerLayout>,
    params: Params,
}

#[doc(hidden)]
#[derive(Debug, Clone)]
pub struct MlpTape {
    /// Input of every layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of every hidden layer.
    pre: Vec<Vec<f64>>,
}

impl MlpNetwork {
    pub fn zeros(shape: &[usize]) -> Result<MlpNetwork> {
        check_shape(shape)?;
        let mut layers = Vec::new();
        let mut layout = Vec::new();
        let mut off = 0;
        for w in shape.windows(2) {
            let l = LayerLayout { n_in: w[0], n_out: w[1], w: off, b: off + w[0] * w[1] };
            layout.push((ParamGroup::Weights, l.w..l.b));
            layout.push((ParamGroup::Biases, l.b..l.b + l.n_out));
            off = l.b + l.n_out;
            layers.push(l);
        }
        Ok(MlpNetwork { shape: shape.to_vec(), layers, params: Params::new(vec![0.0; off], layout) })
    }

    /// He-normal weights, zero biases.
    pub fn new<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Result<MlpNetwork> {
        let mut net = MlpNetwork::zeros(shape)?;
        let layers = net.layers.clone();
        let p = net.params_mut();
        for l in layers {
            let normal = Normal::new(0.0, (2.0 / l.n_in as f64).sqrt())
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            for v in &mut p[l.w..l.b] {
                *v = normal.sample(rng);
            }
        }
        Ok(net)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Sets every bias of the output layer; handy for tests.
    pub fn set_output_bias(&mut self, b: &[f64]) {
        let l = *self.layers.last().unwrap();
        self.params_mut()[l.b..l.b + l.n_out].copy_from_slice(b);
    }
}

impl Network for MlpNetwork {
    fn input_dim(&self) -> usize {
        self.shape[0]
    }

    fn output_dim(&self) -> usize {
        *self.shape.last().unwrap()
    }

    fn architecture(&self) -> Architecture {
        Architecture::Mlp { shape: self.shape.clone() }
    }

    fn store(&self) -> &Params {
        &self.params
    }

    fn store_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    fn forward_inner(&self, x: &[f64]) -> (Vec<f64>, TapeInner) {
        let p = self.params.values();
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(last);
        let mut a = x.to_vec();
        for (k, l) in self.layers.iter().enumerate() {
            let mut z = p[l.b..l.b + l.n_out].to_vec();
            for (j, zj) in z.iter_mut().enumerate() {
                let row = &p[l.w + j * l.n_in..l.w + (j + 1) * l.n_in];
                *zj += row.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>();
            }
            inputs.push(a);
            if k < last {
                a = z.iter().map(|&v| v.max(0.0)).collect();
                pre.push(z);
            } else {
                a = z;
            }
        }
        (a, TapeInner::Mlp(MlpTape { inputs, pre }))
    }

    fn backward_inner(&self, tape: &TapeInner, dy: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        let TapeInner::Mlp(t) = tape else {
            return Err(Error::StaleTape);
        };
        let p = self.params.values();
        let mut g = dy.to_vec();
        for (k, l) in self.layers.iter().enumerate().rev() {
            if k < self.layers.len() - 1 {
                for (gj, &z) in g.iter_mut().zip(&t.pre[k]) {
                    if z <= 0.0 {
                        *gj = 0.0;
                    }
                }
            }
            let a = &t.inputs[k];
            let mut da = vec![0.0; l.n_in];
            for j in 0..l.n_out {
                let gj = g[j];
                if gj == 0.0 {
                    continue;
                }
                grads[l.b + j] += gj;
                let off = l.w + j * l.n_in;
                for i in 0..l.n_in {
                    grads[off + i] += gj * a[i];
                    da[i] += gj * p[off + i];
                }
            }
            g = da;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_output_bias() {
        let mut net = MlpNetwork::zeros(&[4, 8, 2]).unwrap();
        net.set_output_bias(&[1.5, -2.0]);
        assert_eq!(net.predict(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.5, -2.0]);
    }
}
