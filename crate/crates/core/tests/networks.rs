mod common;

use common::gradcheck::{kan_net, mlp_net, rbf_net, worst_gradient_error, KAN_NET_SPAN, MLP_NET_SPAN, RBF_NET_SPAN};
use metabbo::networks::{
    Adam, Checkpoint, KanInit, KanNetwork, MlpNetwork, Model, Network, ParamGroup, RbfNetwork,
};
use metabbo::seed;
use metabbo::Error;
use rand::Rng;

fn check<N: Network + Clone>(make: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> N, span: f64) {
    let (ep, ex) = worst_gradient_error(make, span);
    assert!(ep < 1e-4, "param gradient rel err {ep}");
    assert!(ex < 1e-4, "input gradient rel err {ex}");
}

#[test]
fn kan_gradient_check() {
    check(kan_net, KAN_NET_SPAN);
}

#[test]
fn mlp_gradient_check() {
    check(mlp_net, MLP_NET_SPAN);
}

#[test]
fn rbf_gradient_check() {
    check(rbf_net, RBF_NET_SPAN);
}

fn three_models() -> Vec<Model> {
    let mut rng = seed::rng(5);
    let xs: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    vec![
        KanNetwork::new(&[2, 5, 1], 5, 5, KanInit::default(), &mut rng).unwrap().into(),
        MlpNetwork::new(&[2, 16, 1], &mut rng).unwrap().into(),
        RbfNetwork::from_data(&xs, 10, &mut rng).unwrap().into(),
    ]
}

#[test]
fn zero_upstream_gives_zero_gradients() {
    for net in three_models() {
        let (_, tape) = net.forward(&[0.3, -0.6]).unwrap();
        let g = net.backward(&tape, &[0.0]).unwrap();
        assert!(g.params.iter().all(|&v| v == 0.0));
        assert!(g.input.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn frozen_groups_have_zero_gradient() {
    for mut net in three_models() {
        let groups = net.param_groups();
        let target = groups[0].0;
        net.set_frozen(target, true);
        let (_, tape) = net.forward(&[0.3, -0.6]).unwrap();
        let g = net.backward(&tape, &[1.0]).unwrap();
        for (group, range) in &groups {
            if *group == target {
                assert!(g.params[range.clone()].iter().all(|&v| v == 0.0));
            }
        }
        assert!(g.params.iter().any(|&v| v != 0.0));
    }
}

#[test]
fn kan_groups_cover_params() {
    let net = KanNetwork::zeros(&[2, 3, 1], 5, 5).unwrap();
    let total: usize = net.param_groups().iter().map(|(_, r)| r.len()).sum();
    assert_eq!(total, net.n_params());
    assert!(net.param_groups().iter().any(|(g, _)| *g == ParamGroup::SplineCoeffs));
}

#[test]
fn stale_tape_is_rejected() {
    for mut net in three_models() {
        let (_, tape) = net.forward(&[0.1, 0.2]).unwrap();
        net.params_mut()[0] += 0.01;
        assert!(matches!(net.backward(&tape, &[1.0]), Err(Error::StaleTape)));
    }
}

#[test]
fn tape_from_other_network_is_rejected() {
    let models = three_models();
    let (_, tape) = models[0].forward(&[0.1, 0.2]).unwrap();
    assert!(matches!(models[1].backward(&tape, &[1.0]), Err(Error::StaleTape)));
}

#[test]
fn dimension_mismatch() {
    for net in three_models() {
        assert!(matches!(net.forward(&[0.1]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }
}

#[test]
fn forward_is_bit_identical() {
    for net in three_models() {
        let a = net.predict(&[0.123, -0.456]).unwrap();
        let b = net.predict(&[0.123, -0.456]).unwrap();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }
}

#[test]
fn checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (k, net) in three_models().into_iter().enumerate() {
        let path = dir.path().join(format!("net{k}.json"));
        Checkpoint::of(&net).save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap().model().unwrap();
        assert_eq!(back.architecture(), net.architecture());
        assert_eq!(back.params(), net.params());
        let x = [0.7, -0.2];
        assert_eq!(back.predict(&x).unwrap(), net.predict(&x).unwrap());
    }
}

#[test]
fn checkpoint_version_is_checked() {
    let net = &three_models()[1];
    let mut ck = Checkpoint::of(net);
    ck.version = 99;
    assert!(matches!(ck.model(), Err(Error::Checkpoint(_))));
}

#[test]
fn adam_fits_a_line() {
    let mut rng = seed::rng(2);
    let mut net = MlpNetwork::new(&[1, 1], &mut rng).unwrap();
    let mut opt = Adam::new(net.n_params(), 0.05);
    for _ in 0..2000 {
        let mut grads = vec![0.0; net.n_params()];
        for k in 0..10 {
            let x = k as f64 / 10.0;
            let (y, tape) = net.forward(&[x]).unwrap();
            let target = 3.0 * x - 1.0;
            net.backward_accumulate(&tape, &[(y[0] - target) / 10.0], &mut grads).unwrap();
        }
        let mut p = net.params().to_vec();
        opt.step(&mut p, &grads).unwrap();
        net.params_mut().copy_from_slice(&p);
    }
    let p = net.params();
    assert!((p[0] - 3.0).abs() < 1e-3 && (p[1] + 1.0).abs() < 1e-3, "{p:?}");
}
