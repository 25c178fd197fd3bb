//! Backprop against central finite differences.

use rand::Rng;
use shrinkinit::{
    backward, forward, gaussian_matrix, objective_mse, seeded_rng, ActivationKind, Dropout, Layer, Matrix,
    NetworkParams,
};

const H: f64 = 1e-5;

fn loss(params: &NetworkParams, x: &Matrix, t: &Matrix) -> f64 {
    let c = forward(params, x, Dropout::Off).unwrap();
    objective_mse(c.output(), t).unwrap()
}

fn perturbed(params: &NetworkParams, k: usize, i: usize, j: usize, delta: f64) -> NetworkParams {
    let mut layers = params.layers().to_vec();
    let w = &layers[k].weight;
    layers[k].weight = Matrix::from_fn(w.rows(), w.cols(), |a, b| {
        w.get(a, b) + if (a, b) == (i, j) { delta } else { 0.0 }
    })
    .unwrap();
    NetworkParams::new(layers).unwrap()
}

fn perturbed_bias(params: &NetworkParams, k: usize, i: usize, delta: f64) -> NetworkParams {
    let mut layers = params.layers().to_vec();
    layers[k].bias[i] += delta;
    NetworkParams::new(layers).unwrap()
}

fn rel(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-8)
}

/// Largest per-entry relative error between analytic and numeric gradients.
fn worst_error(params: &NetworkParams, x: &Matrix, t: &Matrix) -> f64 {
    let cache = forward(params, x, Dropout::Off).unwrap();
    let g = backward(params, &cache, t).unwrap();
    let mut worst = 0.0_f64;
    for (k, layer) in params.layers().iter().enumerate() {
        for i in 0..layer.weight.rows() {
            for j in 0..layer.weight.cols() {
                let num = (loss(&perturbed(params, k, i, j, H), x, t) - loss(&perturbed(params, k, i, j, -H), x, t))
                    / (2.0 * H);
                worst = worst.max(rel(g.weights[k].get(i, j), num));
            }
            let num = (loss(&perturbed_bias(params, k, i, H), x, t) - loss(&perturbed_bias(params, k, i, -H), x, t))
                / (2.0 * H);
            worst = worst.max(rel(g.biases[k][i], num));
        }
    }
    worst
}

fn random_net(dims: &[usize], act: ActivationKind, seed: u64) -> NetworkParams {
    let mut rng = seeded_rng(seed);
    let layers = dims
        .windows(2)
        .map(|w| {
            let std = 1.0 / (w[0] as f64).sqrt();
            let mut l = Layer::new(gaussian_matrix(w[1], w[0], std, &mut rng).unwrap(), act);
            l.bias = (0..w[1]).map(|_| rng.random_range(-0.5..0.5)).collect();
            l
        })
        .collect();
    NetworkParams::new(layers).unwrap()
}

#[test]
fn three_layer_sigmoid_matches_finite_differences() {
    let p = random_net(&[4, 6, 5, 3], ActivationKind::Sigmoid, 1);
    let x = gaussian_matrix(4, 7, 1.0, &mut seeded_rng(2)).unwrap();
    let t = gaussian_matrix(3, 7, 1.0, &mut seeded_rng(3)).unwrap();
    let err = worst_error(&p, &x, &t);
    assert!(err <= 1e-4, "worst relative error {err}");
}

#[test]
fn every_activation_matches_finite_differences() {
    for (s, act) in [ActivationKind::Tanh, ActivationKind::ReLU, ActivationKind::Identity]
        .into_iter()
        .enumerate()
    {
        let p = random_net(&[3, 8, 4], act, 10 + s as u64);
        let x = gaussian_matrix(3, 5, 1.0, &mut seeded_rng(20 + s as u64)).unwrap();
        let t = gaussian_matrix(4, 5, 1.0, &mut seeded_rng(30 + s as u64)).unwrap();
        let err = worst_error(&p, &x, &t);
        assert!(err <= 1e-4, "{act:?}: worst relative error {err}");
    }
}

#[test]
fn dropout_gradients_match_finite_differences_with_frozen_masks() {
    let p = random_net(&[3, 6, 6, 2], ActivationKind::Sigmoid, 4);
    let x = gaussian_matrix(3, 6, 1.0, &mut seeded_rng(5)).unwrap();
    let t = gaussian_matrix(2, 6, 1.0, &mut seeded_rng(6)).unwrap();
    let mut rng = seeded_rng(7);
    let cache = forward(
        &p,
        &x,
        Dropout::Sample {
            rate: 0.4,
            rng: &mut rng,
        },
    )
    .unwrap();
    let masks = cache.dropout_masks.clone().unwrap();
    let g = backward(&p, &cache, &t).unwrap();
    let masked_loss = |q: &NetworkParams| {
        let c = forward(
            q,
            &x,
            Dropout::Replay {
                rate: 0.4,
                masks: &masks,
            },
        )
        .unwrap();
        objective_mse(c.output(), &t).unwrap()
    };
    for (k, layer) in p.layers().iter().enumerate() {
        for i in 0..layer.weight.rows() {
            for j in 0..layer.weight.cols() {
                let num =
                    (masked_loss(&perturbed(&p, k, i, j, H)) - masked_loss(&perturbed(&p, k, i, j, -H))) / (2.0 * H);
                assert!(rel(g.weights[k].get(i, j), num) <= 1e-4);
            }
        }
    }
}
