mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ricsim::nn::cells::{gru_cell, lstm_cell, CellParams};
use ricsim::nn::{persist, train, Activation, CellKind, Dataset, ModelConfig, RecurrentModel, Scaler};
use ricsim::sim::rng_stream;

fn small(arch: CellKind, units: Vec<usize>, seed: u64) -> ModelConfig {
    ModelConfig { units, lookback: 5, dropout: 0.0, activation: Activation::Linear, seed, ..ModelConfig::preset(arch) }
}

fn random_batch(rng: &mut ChaCha8Rng, n: usize, lb: usize) -> Vec<(Vec<f64>, f64)> {
    (0..n).map(|_| ((0..lb).map(|_| rng.random::<f64>()).collect(), rng.random::<f64>())).collect()
}

fn as_refs(b: &[(Vec<f64>, f64)]) -> Vec<(&[f64], f64)> {
    b.iter().map(|(w, t)| (w.as_slice(), *t)).collect()
}

#[test]
fn scalar_cells_match_reference() {
    // one input, one unit, crafted parameters
    let gru_k = [0.3, -0.7, 1.1];
    let gru_r = [0.5, 0.2, -0.9];
    let gru_b = [0.1, -0.2, 0.05];
    let p = CellParams { kernel: &gru_k, recurrent: &gru_r, bias: &gru_b };
    let m = RecurrentModel::from_parts(
        ModelConfig { units: vec![1], lookback: 1, ..ModelConfig::gru() },
        Scaler::default(),
        [gru_k.as_slice(), &gru_r, &gru_b, &[0.0, 0.0]].concat(),
    )
    .unwrap();
    let (layers, _, _) = common::unpack(&m);
    for (x, h) in [(0.4, -0.3), (1.7, 0.9), (-2.0, 0.0)] {
        let got = gru_cell(&[x], &[h], &p).unwrap()[0];
        let want = common::ref_gru_step(&layers[0], &[x], &[h])[0];
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    let k = [0.3, -0.7, 1.1, 0.4];
    let r = [0.5, 0.2, -0.9, 0.6];
    let b = [0.1, -0.2, 0.05, 0.3];
    let p = CellParams { kernel: &k, recurrent: &r, bias: &b };
    let m = RecurrentModel::from_parts(
        ModelConfig { units: vec![1], lookback: 1, ..ModelConfig::lstm() },
        Scaler::default(),
        [k.as_slice(), &r, &b, &[0.0, 0.0]].concat(),
    )
    .unwrap();
    let (layers, _, _) = common::unpack(&m);
    for (x, h, c) in [(0.4, -0.3, 0.8), (1.7, 0.9, -1.5), (-2.0, 0.0, 0.0)] {
        let (gh, gc) = lstm_cell(&[x], &[h], &[c], &p).unwrap();
        let (wh, wc) = common::ref_lstm_step(&layers[0], &[x], &[h], &[c]);
        assert!((gh[0] - wh[0]).abs() < 1e-12 && (gc[0] - wc[0]).abs() < 1e-12);
    }
}

#[test]
fn forward_matches_reference_for_stacked_models() {
    for arch in [CellKind::Gru, CellKind::Lstm] {
        let m = RecurrentModel::new(small(arch, vec![6, 3], 9)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (w, _) in random_batch(&mut rng, 10, 5) {
            assert!((m.forward(&w).unwrap() - common::ref_forward(&m, &w)).abs() < 1e-12);
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    for arch in [CellKind::Gru, CellKind::Lstm] {
        for draw in 0..5u64 {
            let m = RecurrentModel::new(small(arch, vec![4, 3], 100 + draw)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(draw);
            let b = random_batch(&mut rng, 3, 5);
            let worst = common::gradient_check(&m, &as_refs(&b), 1e-5, 1e-6);
            assert!(worst < 1e-4, "{arch:?} draw {draw}: {worst}");
        }
    }
}

#[test]
fn dropout_gradients_match_finite_differences() {
    let cfg = ModelConfig { units: vec![4, 3], lookback: 4, dropout: 0.3, activation: Activation::Linear, seed: 5, ..ModelConfig::lstm() };
    let mut m = RecurrentModel::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let b = random_batch(&mut rng, 4, 4);
    let s = as_refs(&b);
    let masks = rng_stream("test/dropout", 1);
    let (_, g) = m.loss_and_grad(&s, Some(&mut masks.clone()));
    let eps = 1e-5;
    for i in 0..g.len() {
        let orig = m.params()[i];
        m.params_mut()[i] = orig + eps;
        let (lp, _) = m.loss_and_grad(&s, Some(&mut masks.clone()));
        m.params_mut()[i] = orig - eps;
        let (lm, _) = m.loss_and_grad(&s, Some(&mut masks.clone()));
        m.params_mut()[i] = orig;
        let num = (lp - lm) / (2.0 * eps);
        let rel = (g[i] - num).abs() / g[i].abs().max(num.abs()).max(1e-6);
        assert!(rel < 1e-4, "param {i}: {} vs {num}", g[i]);
    }
}

#[test]
fn relu_head_gradients_match_finite_differences() {
    for arch in [CellKind::Gru, CellKind::Lstm] {
        let mut m = RecurrentModel::new(ModelConfig { activation: Activation::Relu, ..small(arch, vec![4], 3) }).unwrap();
        // keep the head pre-activation clear of the kink
        let last = m.params().len() - 1;
        m.params_mut()[last] = 3.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random_batch(&mut rng, 3, 5);
        assert!(common::gradient_check(&m, &as_refs(&b), 1e-5, 1e-6) < 1e-4);
    }
}

#[test]
fn small_step_against_gradient_lowers_loss() {
    for arch in [CellKind::Gru, CellKind::Lstm] {
        let mut m = RecurrentModel::new(small(arch, vec![4], 21)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = random_batch(&mut rng, 8, 5);
        let s = as_refs(&b);
        let (before, g) = m.loss_and_grad(&s, None);
        for (p, gi) in m.params_mut().iter_mut().zip(&g) {
            *p -= 1e-3 * gi;
        }
        let (after, _) = m.loss_and_grad(&s, None);
        assert!(after < before, "{after} >= {before}");
    }
}

#[test]
fn dropout_is_off_at_inference() {
    let with = RecurrentModel::new(ModelConfig { units: vec![5, 3], ..ModelConfig::lstm() }).unwrap();
    let mut cfg = with.config().clone();
    cfg.dropout = 0.0;
    let without = RecurrentModel::from_parts(cfg, with.scaler(), with.params().to_vec()).unwrap();
    let w: Vec<f64> = (0..15).map(|i| i as f64 / 15.0).collect();
    assert_eq!(with.forward(&w).unwrap(), without.forward(&w).unwrap());
    assert_eq!(with.forward(&w).unwrap(), with.forward(&w).unwrap());
}

#[derive(serde::Deserialize)]
struct Golden {
    arch: CellKind,
    units: Vec<usize>,
    lookback: usize,
    activation: Activation,
    seed: u64,
    window: Vec<f64>,
    output: f64,
}

#[test]
fn forward_matches_golden_values() {
    let text = include_str!("../testdata/golden_forward.json");
    let cases: Vec<Golden> = serde_json::from_str(text).unwrap();
    assert_eq!(cases.len(), 2);
    for g in cases {
        let cfg = ModelConfig {
            units: g.units,
            lookback: g.lookback,
            activation: g.activation,
            seed: g.seed,
            ..ModelConfig::preset(g.arch)
        };
        let m = RecurrentModel::new(cfg).unwrap();
        let y = m.forward(&g.window).unwrap();
        assert!((y - g.output).abs() < 1e-9, "{:?}: {y} vs {}", g.arch, g.output);
        assert!((common::ref_forward(&m, &g.window) - g.output).abs() < 1e-9);
    }
}

#[test]
fn reload_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let mut m = RecurrentModel::new(ModelConfig { units: vec![7], lookback: 6, ..ModelConfig::gru() }).unwrap();
    m.set_scaler(Scaler::new(-130.0, -50.0).unwrap());
    persist::save(&m, &path).unwrap();
    let back = persist::load(&path).unwrap();
    let hist = [-90.0, -91.5, -93.0, -92.2, -95.0, -96.1];
    let a = m.predict_recursive(&hist, 4).unwrap();
    let b = back.predict_recursive(&hist, 4).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

/// A GRU whose update gate is saturated open and whose candidate is a tiny
/// linear copy of the input, read out by a dense head that undoes the scale.
fn copy_last_model(lookback: usize) -> RecurrentModel {
    let eps = 1e-4;
    let cfg = ModelConfig { units: vec![1], lookback, activation: Activation::Linear, ..ModelConfig::gru() };
    // kernel [z, r, h], recurrent [z, r, h], bias [z, r, h], dense w, dense b
    let params = vec![0.0, 0.0, eps, 0.0, 0.0, 0.0, 50.0, 0.0, 0.0, 1.0 / eps, 0.0];
    RecurrentModel::from_parts(cfg, Scaler::new(-140.0, -40.0).unwrap(), params).unwrap()
}

#[test]
fn recursive_prediction_of_copy_model_is_flat() {
    let m = copy_last_model(4);
    let hist = [-80.0, -85.0, -90.0, -97.5];
    let p = m.predict_recursive(&hist, 6).unwrap();
    assert_eq!(p.len(), 6);
    for v in p {
        assert!((v + 97.5).abs() < 1e-6, "{v}");
    }
    assert!(m.predict_recursive(&hist, 0).unwrap().is_empty());
    let one = m.predict_recursive(&hist, 1).unwrap()[0];
    let direct = m.predict_dbm(&hist).unwrap();
    assert_eq!(one, direct);
}

#[test]
fn training_is_deterministic() {
    let cfg = ModelConfig { units: vec![4, 3], lookback: 6, epochs: 3, learning_rate: 1e-3, ..ModelConfig::lstm() };
    let d = Dataset::from_values((0..200).map(|i| (i as f64 * 0.1).sin()).collect());
    let (m1, r1) = train(&cfg, &d).unwrap();
    let (m2, r2) = train(&cfg, &d).unwrap();
    assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
    assert_eq!(m1.params(), m2.params());
    assert_eq!(r1.train_mse.len(), r1.epochs_run);
    assert_eq!(r1.val_mae.len(), r1.epochs_run);
}

#[test]
fn early_stopping_keeps_best_epoch() {
    let cfg = ModelConfig {
        units: vec![3],
        lookback: 4,
        epochs: 60,
        patience: 3,
        learning_rate: 5e-2,
        activation: Activation::Linear,
        ..ModelConfig::gru()
    };
    let d = Dataset::from_values((0..150).map(|i| (i as f64 * 0.37).sin() + 0.1 * (i as f64 * 1.3).cos()).collect());
    let (_, r) = train(&cfg, &d).unwrap();
    let best = r.val_mse.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(r.best_val_mse(), best);
    assert!(r.epochs_run - r.best_epoch <= 3);
}
