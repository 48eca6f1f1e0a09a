//! Finite-difference gradient checks shared by the network tests and the
//! acceptance suite.

use metabbo::networks::{KanInit, KanNetwork, MlpNetwork, Network, RbfNetwork};
use metabbo::seed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-5;

pub fn weighted_output<N: Network>(net: &N, x: &[f64], r: &[f64]) -> f64 {
    net.predict(x).unwrap().iter().zip(r).map(|(y, w)| y * w).sum()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-8)
}

/// Central-difference gradients of `r . net(x)` wrt params and input.
pub fn numeric_grads<N: Network + Clone>(net: &N, x: &[f64], r: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut probe = net.clone();
    let mut gp = vec![0.0; net.n_params()];
    for i in 0..net.n_params() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + H;
        let up = weighted_output(&probe, x, r);
        probe.params_mut()[i] = orig - H;
        let down = weighted_output(&probe, x, r);
        probe.params_mut()[i] = orig;
        gp[i] = (up - down) / (2.0 * H);
    }
    let mut gx = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + H;
        let up = weighted_output(net, &xp, r);
        xp[i] = x[i] - H;
        let down = weighted_output(net, &xp, r);
        xp[i] = x[i];
        gx[i] = (up - down) / (2.0 * H);
    }
    (gp, gx)
}

/// Worst (param, input) relative error over 100 random networks and inputs.
pub fn worst_gradient_error<N: Network + Clone>(mut make: impl FnMut(&mut ChaCha8Rng) -> N, span: f64) -> (f64, f64) {
    let mut worst = (0.0f64, 0.0f64);
    let mut rng = seed::rng(11);
    for _ in 0..100 {
        let net = make(&mut rng);
        let x: Vec<f64> = (0..net.input_dim()).map(|_| rng.random_range(-span..span)).collect();
        let r: Vec<f64> = (0..net.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, tape) = net.forward(&x).unwrap();
        let g = net.backward(&tape, &r).unwrap();
        let (np, nx) = numeric_grads(&net, &x, &r);
        let ep = rel_err(&g.params, &np);
        let ex = rel_err(&g.input, &nx);
        worst = (worst.0.max(ep), worst.1.max(ex));
    }
    worst
}

pub fn kan_net(rng: &mut ChaCha8Rng) -> KanNetwork {
            let init = KanInit { coeff_std: 0.5, base_weight: rng.random_range(-1.0..1.0), spline_weight: rng.random_range(0.2..1.5) };
            let mut net = KanNetwork::new(&[3, 4, 2], 5, 5, init, rng).unwrap();
            // decorrelate the scalar weights
            let n = net.n_params();
            for v in net.params_mut()[n - 40..].iter_mut() {
                *v *= rng.random_range(0.5..1.5);
            }
            net
        }

pub const KAN_NET_SPAN: f64 = 0.95;

pub fn mlp_net(rng: &mut ChaCha8Rng) -> MlpNetwork {
            let mut net = MlpNetwork::new(&[4, 7, 5, 3], rng).unwrap();
            for v in net.params_mut() {
                *v += rng.random_range(-0.1..0.1);
            }
            net
        }

pub const MLP_NET_SPAN: f64 = 2.0;

pub fn rbf_net(rng: &mut ChaCha8Rng) -> RbfNetwork {
            let xs: Vec<Vec<f64>> =
                (0..40).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let mut net = RbfNetwork::from_data(&xs, 8, rng).unwrap();
            let n = net.n_params();
            net.params_mut()[n - 9..].iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            net
        }

pub const RBF_NET_SPAN: f64 = 1.0;

