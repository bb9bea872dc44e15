mod common;

use entcat::datagen::DatasetRow;
use entcat::majorization::ProbVector;
use entcat::mlp::{
    encode_row, load_checkpoint, loss, save_checkpoint, Activation, Dense, LayerSpec, MlpModel,
};
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;

#[test]
fn backprop_matches_finite_differences() {
    for seed in [1, 2, 3] {
        let err = common::gradient_check_error(seed, 1e-5);
        assert!(err < 1e-4, "seed {seed}: relative error {err:e}");
    }
}

fn single_layer(w: Array2<f64>, b: Array1<f64>) -> MlpModel {
    let fan_in = w.ncols();
    MlpModel::from_layers(
        fan_in,
        vec![Dense {
            weights: w,
            bias: b,
            activation: Activation::Sigmoid,
        }],
    )
    .unwrap()
}

#[test]
fn hand_built_net_matches_closed_form() {
    let m = single_layer(array![[0.7, -1.3]], array![0.2]);
    let x = [0.4, 0.9];
    let z: f64 = 0.7 * 0.4 - 1.3 * 0.9 + 0.2;
    let want = 1.0 / (1.0 + (-z).exp());
    assert!((m.forward(&x).unwrap() - want).abs() < 1e-15);
}

#[test]
fn zero_network_outputs_one_half_and_head_bias_gradient() {
    let specs = [
        LayerSpec { fan_in: 3, fan_out: 4, activation: Activation::Relu },
        LayerSpec { fan_in: 4, fan_out: 1, activation: Activation::Sigmoid },
    ];
    let mut m = MlpModel::new(3, &specs, 0).unwrap();
    for p in m.params_mut() {
        p.fill(0.0);
    }
    assert_eq!(m.forward(&[0.3, 0.2, 0.5]).unwrap(), 0.5);
    let (g, l) = m.backward(Array2::zeros((4, 3)).view(), &[0.0; 4]).unwrap();
    let t = g.tensors();
    assert_eq!(t[3], &[0.5]);
    assert!(t[..3].iter().all(|x| x.iter().all(|&v| v == 0.0)));
    assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn duplicated_sample_gives_the_same_mean_gradient() {
    let m = MlpModel::build_default(3, 5).unwrap();
    let x = array![[0.6, 0.3, 0.1, 0.5, 0.4, 0.1]];
    let xx = array![[0.6, 0.3, 0.1, 0.5, 0.4, 0.1], [0.6, 0.3, 0.1, 0.5, 0.4, 0.1]];
    let (g1, _) = m.backward(x.view(), &[1.0]).unwrap();
    let (g2, _) = m.backward(xx.view(), &[1.0, 1.0]).unwrap();
    for (a, b) in g1.tensors().iter().zip(g2.tensors()) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0));
        }
    }
}

#[test]
fn loss_closed_forms() {
    assert!((loss(0.5, 1.0) - std::f64::consts::LN_2).abs() < 1e-12);
    assert!((loss(0.9, 0.0) - 2.302_585_092_994_045_5).abs() < 1e-12);
    assert!(loss(1.0 - 1e-15, 1.0) < 1e-11);
    assert!(loss(0.0, 1.0).is_finite());
}

#[test]
fn encoding_examples() {
    let pv = |v: &[f64]| ProbVector::new(v.to_vec()).unwrap();
    let incomparable = DatasetRow::labelled(pv(&[0.5, 0.25, 0.25, 0.0]), pv(&[0.4, 0.4, 0.1, 0.1])).unwrap();
    let [(x1, y1), (x2, y2)] = encode_row(&incomparable);
    assert_eq!((y1, y2), (0.0, 0.0));
    assert_eq!(x1.len(), 8);
    assert_eq!(&x2[..4], &[0.4, 0.4, 0.1, 0.1]);

    let extremes = DatasetRow::labelled(ProbVector::uniform(4), ProbVector::product(4)).unwrap();
    let [(_, a), (_, b)] = encode_row(&extremes);
    assert_eq!((a, b), (1.0, 0.0));

    let v = pv(&[0.6, 0.3, 0.1]);
    let same = DatasetRow::labelled(v.clone(), v).unwrap();
    let [(_, a), (_, b)] = encode_row(&same);
    assert_eq!((a, b), (1.0, 1.0));
}

#[test]
fn checkpoint_file_round_trip_preserves_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let m = MlpModel::build_default(5, 123).unwrap();
    save_checkpoint(&m, None, &path).unwrap();
    let (back, prov) = load_checkpoint(&path).unwrap();
    assert!(prov.is_none());
    let mut r = common::rng(9);
    for _ in 0..20 {
        let x: Vec<f64> = (0..10).map(|_| rand::Rng::random::<f64>(&mut r)).collect();
        assert_eq!(m.forward(&x).unwrap().to_bits(), back.forward(&x).unwrap().to_bits());
    }
}

proptest! {
    #[test]
    fn outputs_stay_in_the_open_unit_interval(
        seed in any::<u64>(),
        x in prop::collection::vec(-1e6f64..1e6, 6),
    ) {
        let m = MlpModel::build_default(3, seed).unwrap();
        let p = m.forward(&x).unwrap();
        prop_assert!(p > 0.0 && p < 1.0);
    }
}
