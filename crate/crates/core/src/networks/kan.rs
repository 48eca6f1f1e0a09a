use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::spline::SplineGrid;
use super::{check_shape, Architecture, Network, ParamGroup, Params, TapeInner};
use crate::error::{Error, Result};

pub fn silu(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

pub fn silu_prime(x: f64) -> f64 {
    let s = 1.0 / (1.0 + (-x).exp());
    s * (1.0 + x * (1.0 - s))
}

/// One edge function `w_b * silu(x) + w_s * sum_i c_i B_i(x)`.
pub fn kan_edge(x: f64, w_b: f64, w_s: f64, coeffs: &[f64], grid: &SplineGrid) -> f64 {
    assert_eq!(coeffs.len(), grid.n_basis());
    let mut vals = [0.0; 16];
    let mut ders = [0.0; 16];
    let (first, _) = grid.local(x, &mut vals, &mut ders);
    let spline: f64 = (0..=grid.degree).map(|m| coeffs[first + m] * vals[m]).sum();
    w_b * silu(x) + w_s * spline
}

/// Initial values for a freshly built KAN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KanInit {
    pub coeff_std: f64,
    pub base_weight: f64,
    pub spline_weight: f64,
}

impl Default for KanInit {
    fn default() -> Self {
        KanInit { coeff_std: 0.1, base_weight: 1.0, spline_weight: 1.0 }
    }
}

#[derive(Debug, Clone, Copy)]
struct LayerLayout {
    n_in: usize,
    n_out: usize,
    coeffs: usize,
    base: usize,
    spline: usize,
}

/// Stack of KAN layers on a shared uniform spline grid.
#[derive(Debug, Clone)]
pub struct KanNetwork {
    shape: Vec<usize>,
    grid: SplineGrid,
    layers: Vec<LayerLayout>,
    params: Params,
}

#[doc(hidden)]
#[derive(Debug, Clone)]
pub struct KanTape {
    layers: Vec<LayerTape>,
}

#[derive(Debug, Clone)]
struct LayerTape {
    input: Vec<f64>,
    first: Vec<usize>,
    vals: Vec<f64>,
    ders: Vec<f64>,
    spline: Vec<f64>,
}

impl KanNetwork {
    /// All-zero network; used when restoring from a checkpoint.
    pub fn zeros(shape: &[usize], grid_size: usize, degree: usize) -> Result<KanNetwork> {
        check_shape(shape)?;
        if grid_size == 0 || degree > 10 {
            return Err(Error::InvalidConfig(format!(
                "spline grid {grid_size} / degree {degree} not supported"
            )));
        }
        let grid = SplineGrid::new(grid_size, degree);
        let nb = grid.n_basis();
        let mut layers = Vec::new();
        let mut layout = Vec::new();
        let mut off = 0;
        for w in shape.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let edges = n_in * n_out;
            let l = LayerLayout {
                n_in,
                n_out,
                coeffs: off,
                base: off + edges * nb,
                spline: off + edges * nb + edges,
            };
            layout.push((ParamGroup::SplineCoeffs, l.coeffs..l.base));
            layout.push((ParamGroup::BaseWeights, l.base..l.spline));
            layout.push((ParamGroup::SplineWeights, l.spline..l.spline + edges));
            off = l.spline + edges;
            layers.push(l);
        }
        Ok(KanNetwork { shape: shape.to_vec(), grid, layers, params: Params::new(vec![0.0; off], layout) })
    }

    pub fn new<R: Rng + ?Sized>(
        shape: &[usize],
        grid_size: usize,
        degree: usize,
        init: KanInit,
        rng: &mut R,
    ) -> Result<KanNetwork> {
        let mut net = KanNetwork::zeros(shape, grid_size, degree)?;
        let normal = Normal::new(0.0, init.coeff_std)
            .map_err(|e| Error::InvalidConfig(format!("coefficient std: {e}")))?;
        let layers = net.layers.clone();
        let p = net.params_mut();
        for l in layers {
            for v in &mut p[l.coeffs..l.base] {
                *v = normal.sample(rng);
            }
            p[l.base..l.spline].iter_mut().for_each(|v| *v = init.base_weight);
            p[l.spline..l.spline + l.n_in * l.n_out].iter_mut().for_each(|v| *v = init.spline_weight);
        }
        Ok(net)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn grid(&self) -> &SplineGrid {
        &self.grid
    }

    /// Coefficients of edge `input -> output` in layer `layer`.
    pub fn edge_coeffs(&self, layer: usize, output: usize, input: usize) -> &[f64] {
        let l = self.layers[layer];
        let nb = self.grid.n_basis();
        let start = l.coeffs + (output * l.n_in + input) * nb;
        &self.params.values()[start..start + nb]
    }

    fn layer_forward(&self, l: &LayerLayout, a: &[f64]) -> (Vec<f64>, LayerTape) {
        let p = self.params.values();
        let k1 = self.grid.degree + 1;
        let nb = self.grid.n_basis();
        let mut first = vec![0; l.n_in];
        let mut vals = vec![0.0; l.n_in * k1];
        let mut ders = vec![0.0; l.n_in * k1];
        for i in 0..l.n_in {
            let (f, _) = self.grid.local(a[i], &mut vals[i * k1..(i + 1) * k1], &mut ders[i * k1..(i + 1) * k1]);
            first[i] = f;
        }
        let act: Vec<f64> = a.iter().map(|&v| silu(v)).collect();
        let mut spline = vec![0.0; l.n_in * l.n_out];
        let mut out = vec![0.0; l.n_out];
        for j in 0..l.n_out {
            let mut acc = 0.0;
            for i in 0..l.n_in {
                let e = j * l.n_in + i;
                let c = &p[l.coeffs + e * nb + first[i]..];
                let s: f64 = vals[i * k1..(i + 1) * k1].iter().zip(c).map(|(b, c)| b * c).sum();
                spline[e] = s;
                acc += p[l.base + e] * act[i] + p[l.spline + e] * s;
            }
            out[j] = acc;
        }
        (out, LayerTape { input: a.to_vec(), first, vals, ders, spline })
    }

    fn layer_backward(&self, l: &LayerLayout, t: &LayerTape, g: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let p = self.params.values();
        let k1 = self.grid.degree + 1;
        let nb = self.grid.n_basis();
        let mut da = vec![0.0; l.n_in];
        for i in 0..l.n_in {
            let x = t.input[i];
            let (act, dact) = (silu(x), silu_prime(x));
            let vals = &t.vals[i * k1..(i + 1) * k1];
            let ders = &t.ders[i * k1..(i + 1) * k1];
            for j in 0..l.n_out {
                let gj = g[j];
                if gj == 0.0 {
                    continue;
                }
                let e = j * l.n_in + i;
                let wb = p[l.base + e];
                let ws = p[l.spline + e];
                let cstart = l.coeffs + e * nb + t.first[i];
                grads[l.base + e] += gj * act;
                grads[l.spline + e] += gj * t.spline[e];
                let mut dspline = 0.0;
                for m in 0..k1 {
                    grads[cstart + m] += gj * ws * vals[m];
                    dspline += p[cstart + m] * ders[m];
                }
                da[i] += gj * (wb * dact + ws * dspline);
            }
        }
        da
    }
}

impl Network for KanNetwork {
    fn input_dim(&self) -> usize {
        self.shape[0]
    }

    fn output_dim(&self) -> usize {
        *self.shape.last().unwrap()
    }

    fn architecture(&self) -> Architecture {
        Architecture::Kan { shape: self.shape.clone(), grid: self.grid.intervals, degree: self.grid.degree }
    }

    fn store(&self) -> &Params {
        &self.params
    }

    fn store_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    fn forward_inner(&self, x: &[f64]) -> (Vec<f64>, TapeInner) {
        let mut a = x.to_vec();
        let mut tapes = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let (out, t) = self.layer_forward(l, &a);
            tapes.push(t);
            a = out;
        }
        (a, TapeInner::Kan(KanTape { layers: tapes }))
    }

    fn backward_inner(&self, tape: &TapeInner, dy: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        let TapeInner::Kan(t) = tape else {
            return Err(Error::StaleTape);
        };
        let mut g = dy.to_vec();
        for (l, lt) in self.layers.iter().zip(&t.layers).rev() {
            g = self.layer_backward(l, lt, &g, grads);
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::networks::Network;

    #[test]
    fn edge_examples() {
        let g = SplineGrid::new(5, 5);
        let zeros = vec![0.0; g.n_basis()];
        let ones = vec![1.0; g.n_basis()];
        assert_eq!(kan_edge(0.0, 1.0, 0.0, &zeros, &g), 0.0);
        assert!((kan_edge(0.3, 0.0, 1.0, &ones, &g) - 1.0).abs() < 1e-12);
        assert!((kan_edge(1.0, 1.0, 0.0, &zeros, &g) - 0.7310585786300049).abs() < 1e-12);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = KanNetwork::zeros(&[3, 4, 1], 5, 5).unwrap();
        assert_eq!(net.predict(&[0.1, -0.4, 0.9]).unwrap(), vec![0.0]);
    }

    #[test]
    fn parameter_count() {
        let net = KanNetwork::zeros(&[10, 10, 1], 5, 5).unwrap();
        // (G + k) coefficients plus two scalars per edge
        assert_eq!(net.n_params(), (100 + 10) * 12);
    }
}
