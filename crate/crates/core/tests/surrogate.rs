use metabbo::networks::{KanInit, KanNetwork, Model, Network};
use metabbo::problems::{BbobFunction, Problem, ProblemSpec};
use metabbo::sampling::build_dataset;
use metabbo::seed;
use metabbo::surrogate::{
    concordance, lambda_schedule, mse_loss, order_correction, pairwise_order_accuracy, roa_loss,
    train_surrogate, LossMode, SlsConfig,
};
use proptest::prelude::*;

/// Quadratic-time reference for the pairwise metric.
fn brute_concordance(t: &[f64], p: &[f64]) -> (u64, u64) {
    let (mut c, mut total) = (0, 0);
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            if t[i] == t[j] {
                continue;
            }
            total += 1;
            let agree = (t[i] < t[j] && p[i] < p[j]) || (t[i] > t[j] && p[i] > p[j]);
            if agree {
                c += 1;
            }
        }
    }
    (c, total)
}

#[test]
fn misordering_example_against_brute_force() {
    let t = [9.0, 5.1, 5.0, 3.0, 1.0];
    let p = [9.0, 5.0, 5.1, 3.0, 1.0];
    assert_eq!(brute_concordance(&t, &p), (9, 10));
    assert_eq!(concordance(&t, &p), (9, 10));
    assert_eq!(order_correction(&t, &p)[1], 2.0);
}

#[test]
fn oc_floor_when_predictions_are_exact() {
    let t = [7.0, 4.0, 2.5, 1.0, -3.0];
    let oc = order_correction(&t, &t);
    for i in 1..4 {
        assert!((oc[i] - 0.5 * (t[i - 1] - t[i + 1])).abs() < 1e-15);
    }
}

#[test]
fn lambda_zero_and_one() {
    let t = [3.0, 2.0, 1.0, 0.0];
    let p = [2.5, 2.2, 0.1, 0.4];
    let oc: f64 = order_correction(&t, &p).iter().sum::<f64>() / 4.0;
    let mse = mse_loss(&t, &p).unwrap().loss;
    assert!((roa_loss(&t, &p, 0.0).unwrap().loss - oc).abs() < 1e-15);
    assert!((roa_loss(&t, &p, 1.0).unwrap().loss - (oc + mse)).abs() < 1e-15);
}

#[test]
fn mse_gradient_matches_finite_difference() {
    let t = [0.3, -1.2, 2.0];
    let p = [0.1, -0.7, 2.4];
    let g = mse_loss(&t, &p).unwrap().grads;
    let h = 1e-6;
    for i in 0..3 {
        let mut up = p;
        let mut dn = p;
        up[i] += h;
        dn[i] -= h;
        let fd = (mse_loss(&t, &up).unwrap().loss - mse_loss(&t, &dn).unwrap().loss) / (2.0 * h);
        assert!((fd - g[i]).abs() < 1e-8);
    }
}

#[test]
fn lambda_is_nonincreasing() {
    let mut l = 1.0;
    for e in 1..=1000 {
        let next = lambda_schedule(l, e, 1000);
        assert!(next <= l);
        l = next;
    }
    assert_eq!(l, 0.0);
}

fn sorted_batch() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..30).prop_flat_map(|n| {
        (prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n)).prop_map(
            |(mut t, p)| {
                t.sort_by(|a, b| b.total_cmp(a));
                (t, p)
            },
        )
    })
}

proptest! {
    #[test]
    fn fenwick_matches_brute_force(t in prop::collection::vec(-3i32..3, 2..60), p in prop::collection::vec(-3i32..3, 60)) {
        let t: Vec<f64> = t.into_iter().map(f64::from).collect();
        let p: Vec<f64> = p[..t.len()].iter().map(|&v| f64::from(v)).collect();
        prop_assert_eq!(concordance(&t, &p), brute_concordance(&t, &p));
    }

    #[test]
    fn order_accuracy_invariant_under_increasing_maps(t in prop::collection::vec(-5.0f64..5.0, 2..40), p in prop::collection::vec(-5.0f64..5.0, 40)) {
        let p = &p[..t.len()];
        let mapped: Vec<f64> = p.iter().map(|v| (0.7 * v).exp() * 3.0 + 1.0).collect();
        prop_assert_eq!(pairwise_order_accuracy(&t, p), pairwise_order_accuracy(&t, &mapped));
    }

    #[test]
    fn oc_lower_bound((t, p) in sorted_batch()) {
        let oc = order_correction(&t, &p);
        for i in 1..t.len() - 1 {
            let floor = 0.5 * (t[i - 1] - t[i + 1]);
            prop_assert!(oc[i] >= floor - 1e-12);
            if t[i + 1] <= p[i] && p[i] <= t[i - 1] {
                prop_assert!((oc[i] - floor).abs() < 1e-9);
            } else if p[i] > t[i - 1] + 1e-9 || p[i] < t[i + 1] - 1e-9 {
                prop_assert!(oc[i] > floor);
            }
        }
    }

    #[test]
    fn roa_gradient_matches_finite_difference((t, p) in sorted_batch(), lambda in 0.0f64..1.0) {
        let g = roa_loss(&t, &p, lambda).unwrap().grads;
        let h = 1e-7;
        for i in 0..p.len() {
            let near_kink = [i.checked_sub(1), Some(i + 1)]
                .into_iter()
                .flatten()
                .filter(|&j| j < t.len())
                .any(|j| (p[i] - t[j]).abs() < 1e-6);
            if near_kink {
                continue;
            }
            let mut up = p.clone();
            let mut dn = p.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (roa_loss(&t, &up, lambda).unwrap().loss - roa_loss(&t, &dn, lambda).unwrap().loss) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() < 1e-6, "i={} fd={} g={}", i, fd, g[i]);
        }
    }
}

fn sphere_dataset(n: usize, data_seed: u64) -> metabbo::sampling::SampleSet {
    let spec = ProblemSpec::new(BbobFunction::Sphere, 2);
    let mut p = Problem::new(spec).unwrap();
    build_dataset(&mut p, n, data_seed).unwrap()
}

fn kan(seed_: u64) -> Model {
    KanNetwork::new(&[2, 5, 1], 5, 5, KanInit::default(), &mut seed::rng(seed_)).unwrap().into()
}

#[test]
fn zero_epochs_returns_initial_net() {
    let data = sphere_dataset(200, 1);
    let net = kan(3);
    let cfg = SlsConfig { mse_epochs: 0, roa_epochs: 0, ..SlsConfig::default() };
    let s = train_surrogate(&data, None, net.clone(), &cfg, 9).unwrap();
    assert_eq!(s.model.params(), net.params());
    assert!(s.history.is_empty());
}

#[test]
fn training_is_deterministic() {
    let data = sphere_dataset(300, 1);
    let cfg = SlsConfig { mse_epochs: 5, roa_epochs: 5, ..SlsConfig::default() };
    let a = train_surrogate(&data, None, kan(3), &cfg, 9).unwrap();
    let b = train_surrogate(&data, None, kan(3), &cfg, 9).unwrap();
    assert_eq!(a.model.params(), b.model.params());
    assert_eq!(a.history, b.history);
}

#[test]
fn mse_mode_changes_only_the_loss() {
    let data = sphere_dataset(300, 1);
    let roa = SlsConfig { mse_epochs: 3, roa_epochs: 3, ..SlsConfig::default() };
    let mse = SlsConfig { loss: LossMode::Mse, ..roa.clone() };
    let a = train_surrogate(&data, None, kan(3), &roa, 9).unwrap();
    let b = train_surrogate(&data, None, kan(3), &mse, 9).unwrap();
    // identical during the shared warm-up
    assert_eq!(a.history[..3], b.history[..3]);
    assert_ne!(a.model.params(), b.model.params());
    assert!(b.history.iter().all(|r| r.phase == "mse"));
}

#[test]
fn sphere_2d_reaches_high_order_accuracy() {
    let data = sphere_dataset(2000, 1);
    let (train, hold) = data.split(0.2, 2).unwrap();
    let cfg = SlsConfig { mse_epochs: 200, roa_epochs: 200, ..SlsConfig::default() };
    let s = train_surrogate(&train, Some(&hold), kan(3), &cfg, 4).unwrap();
    let acc = s.meta.order_accuracy.unwrap();
    assert!(acc >= 0.95, "holdout order accuracy {acc}");
}

#[test]
fn checkpoint_preserves_predictions() {
    let data = sphere_dataset(300, 1);
    let cfg = SlsConfig { mse_epochs: 2, roa_epochs: 2, ..SlsConfig::default() };
    let s = train_surrogate(&data, None, kan(3), &cfg, 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    s.save(&path).unwrap();
    let back = metabbo::surrogate::TrainedSurrogate::load(&path).unwrap();
    for x in &data.xs[..20] {
        assert_eq!(back.predict(x).unwrap(), s.predict(x).unwrap());
    }
}
