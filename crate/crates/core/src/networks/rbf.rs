use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{check_dim, Architecture, Network, ParamGroup, Params, TapeInner};
use crate::error::{Error, Result};

/// Gaussian radial basis network with a scalar output.
///
/// Widths are stored as `ln(sigma)` so they stay positive under any update.
#[derive(Debug, Clone)]
pub struct RbfNetwork {
    dim: usize,
    n_centers: usize,
    params: Params,
}

#[doc(hidden)]
#[derive(Debug, Clone)]
pub struct RbfTape {
    input: Vec<f64>,
    phi: Vec<f64>,
    dist2: Vec<f64>,
}

impl RbfNetwork {
    pub fn zeros(dim: usize, n_centers: usize) -> Result<RbfNetwork> {
        if dim == 0 || n_centers == 0 {
            return Err(Error::InvalidConfig("rbf needs dim >= 1 and at least one center".into()));
        }
        let c = n_centers;
        let centers = 0..c * dim;
        let widths = centers.end..centers.end + c;
        let weights = widths.end..widths.end + c;
        let bias = weights.end..weights.end + 1;
        let n = bias.end;
        let layout = vec![
            (ParamGroup::Centers, centers),
            (ParamGroup::Widths, widths),
            (ParamGroup::Weights, weights),
            (ParamGroup::Biases, bias),
        ];
        Ok(RbfNetwork { dim, n_centers, params: Params::new(vec![0.0; n], layout) })
    }

    /// Centers are a random subset of `inputs`; every width is the median
    /// distance from a center to its nearest neighbouring center.
    pub fn from_data<R: Rng + ?Sized>(inputs: &[Vec<f64>], n_centers: usize, rng: &mut R) -> Result<RbfNetwork> {
        let dim = inputs.first().ok_or(Error::EmptyBatch)?.len();
        let c = n_centers.min(inputs.len());
        let mut net = RbfNetwork::zeros(dim, c)?;
        let picked: Vec<&Vec<f64>> = sample(rng, inputs.len(), c).into_iter().map(|i| &inputs[i]).collect();
        for x in &picked {
            check_dim(dim, x.len())?;
        }
        let mut nearest: Vec<f64> = (0..c)
            .map(|a| {
                (0..c)
                    .filter(|&b| b != a)
                    .map(|b| dist2(picked[a], picked[b]).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .filter(|d| d.is_finite() && *d > 0.0)
            .collect();
        nearest.sort_by(f64::total_cmp);
        let width = if nearest.is_empty() { 1.0 } else { median(&nearest) };
        let normal = Normal::new(0.0, 0.1).unwrap();
        let weights: Vec<f64> = (0..c).map(|_| normal.sample(rng)).collect();
        let p = net.params_mut();
        for (k, x) in picked.iter().enumerate() {
            p[k * dim..(k + 1) * dim].copy_from_slice(x);
        }
        p[c * dim..c * dim + c].iter_mut().for_each(|v| *v = width.ln());
        p[c * dim + c..c * dim + 2 * c].copy_from_slice(&weights);
        Ok(net)
    }

    pub fn n_centers(&self) -> usize {
        self.n_centers
    }

    pub fn widths(&self) -> Vec<f64> {
        let (d, c) = (self.dim, self.n_centers);
        self.params.values()[c * d..c * d + c].iter().map(|v| v.exp()).collect()
    }

    /// Overwrites one center, its width, its weight and the bias.
    pub fn set_center(&mut self, k: usize, center: &[f64], width: f64, weight: f64, bias: f64) {
        let (d, c) = (self.dim, self.n_centers);
        let p = self.params_mut();
        p[k * d..(k + 1) * d].copy_from_slice(center);
        p[c * d + k] = width.ln();
        p[c * d + c + k] = weight;
        p[c * d + 2 * c] = bias;
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

impl Network for RbfNetwork {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn architecture(&self) -> Architecture {
        Architecture::Rbf { dim: self.dim, centers: self.n_centers }
    }

    fn store(&self) -> &Params {
        &self.params
    }

    fn store_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    fn forward_inner(&self, x: &[f64]) -> (Vec<f64>, TapeInner) {
        let (d, c) = (self.dim, self.n_centers);
        let p = self.params.values();
        let mut phi = vec![0.0; c];
        let mut d2 = vec![0.0; c];
        let mut y = p[c * d + 2 * c];
        for k in 0..c {
            let r2 = dist2(x, &p[k * d..(k + 1) * d]);
            let s2 = (2.0 * p[c * d + k]).exp();
            phi[k] = (-r2 / (2.0 * s2)).exp();
            d2[k] = r2;
            y += p[c * d + c + k] * phi[k];
        }
        (vec![y], TapeInner::Rbf(RbfTape { input: x.to_vec(), phi, dist2: d2 }))
    }

    fn backward_inner(&self, tape: &TapeInner, dy: &[f64], grads: &mut [f64]) -> Result<Vec<f64>> {
        let TapeInner::Rbf(t) = tape else {
            return Err(Error::StaleTape);
        };
        let (d, c) = (self.dim, self.n_centers);
        let p = self.params.values();
        let g = dy[0];
        let mut dx = vec![0.0; d];
        grads[c * d + 2 * c] += g;
        if g == 0.0 {
            return Ok(dx);
        }
        for k in 0..c {
            let w = p[c * d + c + k];
            let s2 = (2.0 * p[c * d + k]).exp();
            let gphi = g * w * t.phi[k];
            grads[c * d + c + k] += g * t.phi[k];
            grads[c * d + k] += gphi * t.dist2[k] / s2;
            for i in 0..d {
                let diff = t.input[i] - p[k * d + i];
                grads[k * d + i] += gphi * diff / s2;
                dx[i] -= gphi * diff / s2;
            }
        }
        Ok(dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_center_at_input() {
        let mut net = RbfNetwork::zeros(3, 1).unwrap();
        net.set_center(0, &[0.2, -0.1, 0.5], 0.7, 2.5, 0.25);
        let y = net.predict(&[0.2, -0.1, 0.5]).unwrap();
        assert!((y[0] - 2.75).abs() < 1e-15);
        assert!((net.widths()[0] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn widths_from_data_are_positive() {
        let mut rng = crate::seed::rng(3);
        let xs: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let net = RbfNetwork::from_data(&xs, 64, &mut rng).unwrap();
        assert_eq!(net.n_centers(), 64);
        assert!(net.widths().iter().all(|&w| w > 0.0));
    }
}
