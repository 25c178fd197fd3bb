//! Fully connected network: parameters, forward pass with inverted dropout,
//! the mean-squared-error objective and exact backpropagation.
//!
//! Data is laid out with features as rows and samples as columns, so layer
//! `k` maps `X_{k-1}` (`d_{k-1} × n`) to `X_k = act(W_k X_{k-1} + b_k 1ᵀ)`.

use rand::Rng;

use crate::numerics::{Matrix, SeededRng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Sigmoid,
    Tanh,
    ReLU,
    /// Linear pass-through, used by closed-form checks rather than experiments.
    Identity,
}

impl ActivationKind {
    #[inline]
    pub fn eval(self, z: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            ActivationKind::Tanh => z.tanh(),
            ActivationKind::ReLU => z.max(0.0),
            ActivationKind::Identity => z,
        }
    }

    /// Derivative at `z`. ReLU uses 0 at the kink.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => {
                let s = self.eval(z);
                s * (1.0 - s)
            }
            ActivationKind::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            ActivationKind::ReLU => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Identity => 1.0,
        }
    }

    pub fn apply(self, z: &Matrix) -> Matrix {
        z.map(|x| self.eval(x))
    }
}

/// Entry-wise activation.
pub fn activation_apply(kind: ActivationKind, z: &Matrix) -> Matrix {
    kind.apply(z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out_dim × in_dim`
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: ActivationKind,
}

impl Layer {
    /// Layer with zero bias.
    pub fn new(weight: Matrix, activation: ActivationKind) -> Self {
        let bias = vec![0.0; weight.rows()];
        Self {
            weight,
            bias,
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }
}

/// Ordered layers whose shapes chain: each layer's input width equals the
/// previous layer's output width.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    layers: Vec<Layer>,
}

impl NetworkParams {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::param("network needs at least one layer"));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.bias.len() != l.out_dim() {
                return Err(Error::Shape {
                    op: "NetworkParams::new (bias)",
                    lhs: l.weight.shape(),
                    rhs: (l.bias.len(), 1),
                });
            }
            if l.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::NonFinite("NetworkParams::new"));
            }
            if k > 0 && layers[k - 1].out_dim() != l.in_dim() {
                return Err(Error::Shape {
                    op: "NetworkParams::new (chain)",
                    lhs: layers[k - 1].weight.shape(),
                    rhs: l.weight.shape(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, k: usize) -> &Layer {
        &self.layers[k]
    }

    /// Widths `[d_0, d_1, …, d_m]`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].in_dim())
            .chain(self.layers.iter().map(Layer::out_dim))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Replaces one layer's weight, keeping the shape.
    pub fn set_weight(&mut self, k: usize, weight: Matrix) -> Result<()> {
        let layer = self
            .layers
            .get_mut(k)
            .ok_or_else(|| Error::param(format!("layer index {k} out of range")))?;
        if layer.weight.shape() != weight.shape() {
            return Err(Error::Shape {
                op: "set_weight",
                lhs: layer.weight.shape(),
                rhs: weight.shape(),
            });
        }
        layer.weight = weight;
        Ok(())
    }

    /// Divides one layer's weight and bias by `factor`.
    pub(crate) fn shrink_layer(&mut self, k: usize, factor: f64) -> Result<()> {
        let layer = &mut self.layers[k];
        layer.weight = layer.weight.scale(1.0 / factor)?;
        for b in &mut layer.bias {
            *b /= factor;
        }
        Ok(())
    }

    /// Applies `W ← W − lr·dW`, `b ← b − lr·db` to every layer.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) -> Result<()> {
        if grads.weights.len() != self.layers.len() {
            return Err(Error::Shape {
                op: "apply_gradients",
                lhs: (self.layers.len(), 0),
                rhs: (grads.weights.len(), 0),
            });
        }
        for (layer, (dw, db)) in self.layers.iter_mut().zip(grads.weights.iter().zip(&grads.biases)) {
            layer.weight = layer.weight.sub(&dw.scale(lr)?)?;
            for (b, g) in layer.bias.iter_mut().zip(db) {
                *b -= lr * g;
            }
            if layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::NonFinite("apply_gradients"));
            }
        }
        Ok(())
    }
}

/// How dropout is handled in a forward pass.
pub enum Dropout<'a> {
    Off,
    /// Draw fresh masks with the given drop probability.
    Sample {
        rate: f64,
        rng: &'a mut SeededRng,
    },
    /// Reuse masks captured by an earlier pass.
    Replay {
        rate: f64,
        masks: &'a [Matrix],
    },
}

/// Everything one forward pass produced.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub inputs: Matrix,
    /// `Z_k = W_k X_{k-1} + b_k 1ᵀ`, one per layer.
    pub pre_acts: Vec<Matrix>,
    /// `X_k`, after activation and, for hidden layers, dropout.
    pub post_acts: Vec<Matrix>,
    /// Binary keep-masks for the hidden layers when dropout was active.
    pub dropout_masks: Option<Vec<Matrix>>,
    pub dropout_rate: f64,
}

impl ForwardCache {
    /// Data layer `k`: the raw input for `k = 0`, otherwise the output of layer `k`.
    pub fn data_layer(&self, k: usize) -> &Matrix {
        if k == 0 {
            &self.inputs
        } else {
            &self.post_acts[k - 1]
        }
    }

    pub fn output(&self) -> &Matrix {
        self.post_acts.last().expect("non-empty network")
    }
}

pub(crate) fn affine(layer: &Layer, x: &Matrix) -> Result<Matrix> {
    let mut z = layer.weight.matmul(x)?;
    let n = z.cols();
    for (i, &b) in layer.bias.iter().enumerate() {
        if b != 0.0 {
            for v in &mut z.as_mut_slice()[i * n..(i + 1) * n] {
                *v += b;
            }
        }
    }
    Matrix::checked(z.rows(), n, z.into_vec(), "affine")
}

fn apply_mask(x: &Matrix, mask: &Matrix, rate: f64) -> Matrix {
    let keep = 1.0 / (1.0 - rate);
    let data = x
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .map(|(v, m)| v * (m * keep))
        .collect();
    Matrix::from_raw(x.rows(), x.cols(), data)
}

/// Forward pass caching every pre- and post-activation.
///
/// Dropout, when enabled, zeroes hidden activations with probability `rate`
/// and scales survivors by `1/(1 − rate)`; the output layer is never dropped.
pub fn forward(params: &NetworkParams, x0: &Matrix, dropout: Dropout<'_>) -> Result<ForwardCache> {
    if x0.rows() != params.input_dim() {
        return Err(Error::Shape {
            op: "forward",
            lhs: params.layer(0).weight.shape(),
            rhs: x0.shape(),
        });
    }
    let depth = params.depth();
    let rate = match &dropout {
        Dropout::Off => 0.0,
        Dropout::Sample { rate, .. } | Dropout::Replay { rate, .. } => *rate,
    };
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::param(format!("dropout rate must be in [0, 1), got {rate}")));
    }
    if let Dropout::Replay { masks, .. } = &dropout {
        if masks.len() != depth - 1 {
            return Err(Error::param(format!(
                "expected {} dropout masks, got {}",
                depth - 1,
                masks.len()
            )));
        }
    }

    let mut pre_acts = Vec::with_capacity(depth);
    let mut post_acts: Vec<Matrix> = Vec::with_capacity(depth);
    let mut masks = Vec::new();
    let (mut rng_slot, replay) = match dropout {
        Dropout::Sample { rng, .. } => (Some(rng), None),
        Dropout::Replay { masks, .. } => (None, Some(masks)),
        Dropout::Off => (None, None),
    };

    for (k, layer) in params.layers().iter().enumerate() {
        let input = post_acts.last().unwrap_or(x0);
        let z = affine(layer, input)?;
        let mut x = layer.activation.apply(&z);
        let hidden = k + 1 < depth;
        if hidden && rate > 0.0 {
            let mask = if let Some(given) = replay {
                let m = &given[k];
                if m.shape() != x.shape() {
                    return Err(Error::Shape {
                        op: "forward (dropout mask)",
                        lhs: x.shape(),
                        rhs: m.shape(),
                    });
                }
                m.clone()
            } else {
                let rng = rng_slot.as_mut().expect("sampling dropout carries an rng");
                let data = (0..x.rows() * x.cols())
                    .map(|_| if rng.random::<f64>() < rate { 0.0 } else { 1.0 })
                    .collect();
                Matrix::from_raw(x.rows(), x.cols(), data)
            };
            x = apply_mask(&x, &mask, rate);
            masks.push(mask);
        }
        pre_acts.push(z);
        post_acts.push(x);
    }

    Ok(ForwardCache {
        inputs: x0.clone(),
        pre_acts,
        post_acts,
        dropout_masks: (rate > 0.0 && depth > 1).then_some(masks),
        dropout_rate: rate,
    })
}

fn check_same_shape(op: &'static str, a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape {
            op,
            lhs: a.shape(),
            rhs: b.shape(),
        });
    }
    Ok(())
}

/// `(1/(2n))·‖output − targets‖²_F` with `n` the number of samples (columns).
pub fn objective_mse(output: &Matrix, targets: &Matrix) -> Result<f64> {
    check_same_shape("objective_mse", output, targets)?;
    let sq: f64 = output
        .as_slice()
        .iter()
        .zip(targets.as_slice())
        .map(|(o, t)| (o - t) * (o - t))
        .sum();
    Ok(sq / (2.0 * output.cols() as f64))
}

/// Per-layer gradients of [`objective_mse`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

/// Exact gradients of the MSE objective, replaying any dropout masks held in `cache`.
pub fn backward(params: &NetworkParams, cache: &ForwardCache, targets: &Matrix) -> Result<Gradients> {
    let depth = params.depth();
    if cache.pre_acts.len() != depth || cache.post_acts.len() != depth {
        return Err(Error::Shape {
            op: "backward (cache depth)",
            lhs: (depth, 0),
            rhs: (cache.pre_acts.len(), cache.post_acts.len()),
        });
    }
    if cache.inputs.rows() != params.input_dim() {
        return Err(Error::Shape {
            op: "backward (inputs)",
            lhs: params.layer(0).weight.shape(),
            rhs: cache.inputs.shape(),
        });
    }
    let n = cache.inputs.cols();
    for (k, layer) in params.layers().iter().enumerate() {
        let expect = (layer.out_dim(), n);
        for m in [&cache.pre_acts[k], &cache.post_acts[k]] {
            if m.shape() != expect {
                return Err(Error::Shape {
                    op: "backward (stale cache)",
                    lhs: expect,
                    rhs: m.shape(),
                });
            }
        }
    }
    check_same_shape("backward (targets)", cache.output(), targets)?;

    let inv_n = 1.0 / n as f64;
    // dL/dX_m
    let mut upstream = cache.output().sub(targets)?.scale(inv_n)?;
    let mut weights = vec![None; depth];
    let mut biases = vec![Vec::new(); depth];

    for k in (0..depth).rev() {
        let layer = params.layer(k);
        if k + 1 < depth {
            if let Some(masks) = &cache.dropout_masks {
                upstream = apply_mask(&upstream, &masks[k], cache.dropout_rate);
            }
        }
        let act = layer.activation;
        let dz_data = upstream
            .as_slice()
            .iter()
            .zip(cache.pre_acts[k].as_slice())
            .map(|(g, &z)| g * act.derivative(z))
            .collect();
        let dz = Matrix::checked(upstream.rows(), n, dz_data, "backward")?;
        let input = cache.data_layer(k);
        weights[k] = Some(dz.matmul_transpose(input)?);
        biases[k] = (0..dz.rows()).map(|i| dz.row(i).iter().sum()).collect();
        if k > 0 {
            upstream = layer.weight.transpose().matmul(&dz)?;
        }
    }

    Ok(Gradients {
        weights: weights.into_iter().map(|w| w.expect("filled")).collect(),
        biases,
    })
}

/// Fraction of columns whose arg-max row equals the label (lowest row wins ties).
pub fn accuracy(output: &Matrix, labels: &[usize]) -> Result<f64> {
    if output.cols() != labels.len() {
        return Err(Error::Shape {
            op: "accuracy",
            lhs: output.shape(),
            rhs: (labels.len(), 1),
        });
    }
    let classes = output.rows();
    let mut hits = 0usize;
    for (j, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::data(
                None,
                format!("label {label} out of range for {classes} classes"),
            ));
        }
        let mut best = 0;
        for i in 1..classes {
            if output.get(i, j) > output.get(best, j) {
                best = i;
            }
        }
        if best == label {
            hits += 1;
        }
    }
    Ok(hits as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{gaussian_matrix, seeded_rng};

    fn sigmoid_net(dims: &[usize], seed: u64) -> NetworkParams {
        let mut rng = seeded_rng(seed);
        let layers = dims
            .windows(2)
            .map(|w| {
                Layer::new(
                    gaussian_matrix(w[1], w[0], 1.0, &mut rng).unwrap(),
                    ActivationKind::Sigmoid,
                )
            })
            .collect();
        NetworkParams::new(layers).unwrap()
    }

    #[test]
    fn activation_values() {
        assert_eq!(ActivationKind::Sigmoid.eval(0.0), 0.5);
        assert_eq!(ActivationKind::Tanh.eval(0.0), 0.0);
        assert_eq!(ActivationKind::ReLU.eval(-3.0), 0.0);
        assert_eq!(ActivationKind::ReLU.eval(3.0), 3.0);
        assert_eq!(ActivationKind::ReLU.derivative(0.0), 0.0);
    }

    #[test]
    fn sigmoid_is_point_symmetric() {
        let z = gaussian_matrix(4, 6, 3.0, &mut seeded_rng(1)).unwrap();
        let a = activation_apply(ActivationKind::Sigmoid, &z);
        let b = activation_apply(ActivationKind::Sigmoid, &z.scale(-1.0).unwrap());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x + y - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_network_passes_input_through() {
        let p = NetworkParams::new(vec![Layer::new(Matrix::identity(3), ActivationKind::Identity)]).unwrap();
        let x = gaussian_matrix(3, 5, 1.0, &mut seeded_rng(2)).unwrap();
        let c = forward(&p, &x, Dropout::Off).unwrap();
        assert_eq!(c.post_acts[0], x);
        assert!(c.dropout_masks.is_none());
    }

    #[test]
    fn sigmoid_net_range_and_shapes() {
        let p = sigmoid_net(&[5, 4, 3, 2], 3);
        let x = gaussian_matrix(5, 4, 1.0, &mut seeded_rng(4)).unwrap();
        let c = forward(&p, &x, Dropout::Off).unwrap();
        let shapes: Vec<_> = c.post_acts.iter().map(Matrix::shape).collect();
        assert_eq!(shapes, vec![(4, 4), (3, 4), (2, 4)]);
        for (z, a) in c.pre_acts.iter().zip(&c.post_acts) {
            assert!(a.as_slice().iter().all(|&v| v > 0.0 && v < 1.0));
            let again = ActivationKind::Sigmoid.apply(z);
            assert!(again.max_abs_diff(a).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn forward_rejects_wrong_input_rows() {
        let p = sigmoid_net(&[3, 2], 0);
        let x = Matrix::zeros(4, 2);
        assert!(matches!(forward(&p, &x, Dropout::Off), Err(Error::Shape { .. })));
    }

    #[test]
    fn dropout_masks_replay_bit_for_bit() {
        let p = sigmoid_net(&[4, 6, 6, 2], 5);
        let x = gaussian_matrix(4, 7, 1.0, &mut seeded_rng(6)).unwrap();
        let mut rng = seeded_rng(7);
        let first = forward(
            &p,
            &x,
            Dropout::Sample {
                rate: 0.3,
                rng: &mut rng,
            },
        )
        .unwrap();
        let masks = first.dropout_masks.clone().unwrap();
        assert_eq!(masks.len(), 2);
        assert!(masks.iter().all(|m| m.as_slice().iter().all(|&v| v == 0.0 || v == 1.0)));
        let replay = forward(
            &p,
            &x,
            Dropout::Replay {
                rate: 0.3,
                masks: &masks,
            },
        )
        .unwrap();
        assert_eq!(first.output().as_slice(), replay.output().as_slice());
        for (a, b) in first.post_acts.iter().zip(&replay.post_acts) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_out_of_range_dropout() {
        let p = sigmoid_net(&[2, 2, 2], 0);
        let x = Matrix::zeros(2, 2);
        let mut rng = seeded_rng(0);
        assert!(forward(
            &p,
            &x,
            Dropout::Sample {
                rate: 1.0,
                rng: &mut rng
            }
        )
        .is_err());
    }

    #[test]
    fn mse_values() {
        let t = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(objective_mse(&t, &t).unwrap(), 0.0);
        let o = t.add(&Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(objective_mse(&o, &t).unwrap(), 1.0);
        assert!(objective_mse(&o, &Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn mse_matches_two_loop_sum() {
        let mut rng = seeded_rng(12);
        let o = gaussian_matrix(3, 9, 1.0, &mut rng).unwrap();
        let t = gaussian_matrix(3, 9, 1.0, &mut rng).unwrap();
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..9 {
                let d = o[(i, j)] - t[(i, j)];
                acc += d * d;
            }
        }
        assert!((objective_mse(&o, &t).unwrap() - acc / 18.0).abs() < 1e-14);
    }

    #[test]
    fn zero_residual_gives_zero_gradients() {
        let p = sigmoid_net(&[3, 4, 2], 8);
        let x = gaussian_matrix(3, 5, 1.0, &mut seeded_rng(9)).unwrap();
        let c = forward(&p, &x, Dropout::Off).unwrap();
        let g = backward(&p, &c, c.output()).unwrap();
        assert!(g.weights.iter().all(|w| w.as_slice().iter().all(|&v| v == 0.0)));
        assert!(g.biases.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_layer_closed_form_gradient() {
        let mut rng = seeded_rng(10);
        let w = gaussian_matrix(2, 3, 1.0, &mut rng).unwrap();
        let p = NetworkParams::new(vec![Layer::new(w, ActivationKind::Identity)]).unwrap();
        let x = gaussian_matrix(3, 6, 1.0, &mut rng).unwrap();
        let t = gaussian_matrix(2, 6, 1.0, &mut rng).unwrap();
        let c = forward(&p, &x, Dropout::Off).unwrap();
        let g = backward(&p, &c, &t).unwrap();
        let want = c
            .output()
            .sub(&t)
            .unwrap()
            .matmul(&x.transpose())
            .unwrap()
            .scale(1.0 / 6.0)
            .unwrap();
        assert!(g.weights[0].max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn stale_cache_is_rejected() {
        let p = sigmoid_net(&[3, 4, 2], 1);
        let x = gaussian_matrix(3, 5, 1.0, &mut seeded_rng(1)).unwrap();
        let c = forward(&p, &x, Dropout::Off).unwrap();
        let other = sigmoid_net(&[3, 5, 2], 1);
        let t = Matrix::zeros(2, 5);
        assert!(matches!(backward(&other, &c, &t), Err(Error::Shape { .. })));
    }

    #[test]
    fn accuracy_cases() {
        let onehot = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(accuracy(&onehot, &[0, 1, 2]).unwrap(), 1.0);
        let uniform = Matrix::from_rows(&[[0.3, 0.3], [0.3, 0.3]]).unwrap();
        assert_eq!(accuracy(&uniform, &[0, 0]).unwrap(), 1.0);
        assert_eq!(accuracy(&uniform, &[1, 1]).unwrap(), 0.0);
        assert!(matches!(accuracy(&uniform, &[0, 2]), Err(Error::Data { .. })));
    }

    #[test]
    fn accuracy_matches_brute_force_argmax() {
        let mut rng = seeded_rng(13);
        let o = gaussian_matrix(5, 40, 1.0, &mut rng).unwrap();
        let labels: Vec<usize> = (0..40).map(|j| (j * 7) % 5).collect();
        let mut hits = 0;
        for (j, &l) in labels.iter().enumerate() {
            let col = o.column(j);
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if col.iter().position(|&v| v == max) == Some(l) {
                hits += 1;
            }
        }
        assert_eq!(accuracy(&o, &labels).unwrap(), hits as f64 / 40.0);
    }
}
