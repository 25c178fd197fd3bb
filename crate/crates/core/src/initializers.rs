//! Weight initializers: Gaussian random, BN-style variance scaling, per-layer
//! orthonormal (DIN), LSUV, and shrinkage initialization (SINL).
//!
//! SINL starts from a random network and walks two cursors inward from the
//! raw input (`i = 0`) and the network output (`j = m`). For each boundary
//! pair it forms the least-squares bridge `E = X_j X_iᵀ (X_i X_iᵀ)⁺` between
//! the current data of the two layers, takes `E = U S Vᵀ`, and rotates the
//! first weight after `X_i` by `Vᵀ` (right) and the last weight before `X_j`
//! by `U` (left). Rotations leave every singular value of the touched weights
//! intact. When an odd number of weights leaves a single median weight, it is
//! replaced by its orthogonal polar factor `U Vᵀ`.

use std::fmt;
use std::str::FromStr;

use crate::network::{affine, forward, ActivationKind, Dropout, ForwardCache, Layer, NetworkParams};
use crate::numerics::{gaussian_matrix, orthogonal_factor, pinv, seeded_rng, svd_full, Matrix, SvdResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Random,
    Bn,
    Din,
    Lsuv,
    Sinl,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Random, Scheme::Bn, Scheme::Din, Scheme::Lsuv, Scheme::Sinl];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Random => "random",
            Scheme::Bn => "bn",
            Scheme::Din => "din",
            Scheme::Lsuv => "lsuv",
            Scheme::Sinl => "sinl",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown init scheme {s:?}")))
    }
}

/// Initializer choice plus its knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct InitSpec {
    pub scheme: Scheme,
    /// Standard deviation of the Gaussian draws (DIN/LSUV: target singular value).
    pub gain: f64,
    /// Accepted distance of a layer's pre-activation std from 1.
    pub variance_tol: f64,
    pub max_var_iters: usize,
    /// Run variance normalization after SINL.
    pub attach_bn: bool,
    pub activation: ActivationKind,
    pub seed: u64,
}

impl InitSpec {
    pub fn new(scheme: Scheme, seed: u64) -> Self {
        Self {
            scheme,
            gain: 1.0,
            variance_tol: 0.02,
            max_var_iters: 10,
            attach_bn: false,
            activation: ActivationKind::Sigmoid,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::param(format!("gain must be positive, got {}", self.gain)));
        }
        if !(self.variance_tol > 0.0 && self.variance_tol < 1.0) {
            return Err(Error::param(format!(
                "variance_tol must lie in (0, 1), got {}",
                self.variance_tol
            )));
        }
        if self.max_var_iters == 0 {
            return Err(Error::param("max_var_iters must be at least 1"));
        }
        Ok(())
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::param(format!(
            "need at least an input and an output width, got {dims:?}"
        )));
    }
    if dims.contains(&0) {
        return Err(Error::param(format!("layer widths must be positive, got {dims:?}")));
    }
    Ok(())
}

fn check_input(dims: &[usize], x0: &Matrix) -> Result<()> {
    if x0.rows() != dims[0] {
        return Err(Error::Shape {
            op: "initializer input",
            lhs: (dims[0], x0.cols()),
            rhs: x0.shape(),
        });
    }
    Ok(())
}

fn build(dims: &[usize], spec: &InitSpec, weight: impl Fn(Matrix) -> Result<Matrix>) -> Result<NetworkParams> {
    check_dims(dims)?;
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let layers = dims
        .windows(2)
        .map(|w| {
            let g = gaussian_matrix(w[1], w[0], spec.gain, &mut rng)?;
            Ok(Layer::new(weight(g)?, spec.activation))
        })
        .collect::<Result<Vec<_>>>()?;
    NetworkParams::new(layers)
}

/// I.i.d. `N(0, gain²)` weights, zero biases.
pub fn init_random(dims: &[usize], spec: &InitSpec) -> Result<NetworkParams> {
    build(dims, spec, Ok)
}

/// Orthonormal weights scaled by `gain`: the polar factor of a fresh Gaussian draw.
pub fn init_din(dims: &[usize], spec: &InitSpec) -> Result<NetworkParams> {
    let gain = spec.gain;
    build(dims, spec, |g| orthogonal_factor(&g)?.scale(gain))
}

fn population_std(m: &Matrix) -> (f64, f64) {
    let xs = m.as_slice();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let max_abs = xs.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    (var.sqrt(), max_abs)
}

/// Layer-sequential unit-variance scaling of pre-activations.
///
/// From first to last layer, divides `W_k` and `b_k` by the standard deviation
/// of `Z_k` (over all units and samples) until it is within `variance_tol` of
/// one or `max_var_iters` rescalings were made. Each layer sees the data
/// produced by the already-finalized layers before it.
pub fn normalize_output_variance(mut params: NetworkParams, x0: &Matrix, spec: &InitSpec) -> Result<NetworkParams> {
    spec.validate()?;
    if x0.rows() != params.input_dim() {
        return Err(Error::Shape {
            op: "normalize_output_variance",
            lhs: params.layer(0).weight.shape(),
            rhs: x0.shape(),
        });
    }
    if x0.cols() < 2 {
        return Err(Error::param("variance needs at least two samples"));
    }
    let mut input = x0.clone();
    for k in 0..params.depth() {
        let mut z = affine(params.layer(k), &input)?;
        for _ in 0..spec.max_var_iters {
            let (std, max_abs) = population_std(&z);
            if std == 0.0 || std <= 1e-12 * max_abs {
                return Err(Error::ZeroVariance { layer: k });
            }
            if (std - 1.0).abs() <= spec.variance_tol {
                break;
            }
            params.shrink_layer(k, std)?;
            z = affine(params.layer(k), &input)?;
        }
        input = params.layer(k).activation.apply(&z);
    }
    Ok(params)
}

/// Random weights followed by variance normalization.
pub fn init_bn(dims: &[usize], x0: &Matrix, spec: &InitSpec) -> Result<NetworkParams> {
    check_dims(dims)?;
    check_input(dims, x0)?;
    normalize_output_variance(init_random(dims, spec)?, x0, spec)
}

/// Orthonormal weights followed by variance normalization.
pub fn init_lsuv(dims: &[usize], x0: &Matrix, spec: &InitSpec) -> Result<NetworkParams> {
    check_dims(dims)?;
    check_input(dims, x0)?;
    normalize_output_variance(init_din(dims, spec)?, x0, spec)
}

/// Least-squares bridge between two data layers together with its SVD.
#[derive(Debug, Clone)]
pub struct BridgeResult {
    /// `q × p`: maps front data (`p × n`) onto back data (`q × n`).
    pub e: Matrix,
    pub svd: SvdResult,
}

/// `E = X_j X_iᵀ (X_i X_iᵀ)⁺` and its full SVD.
pub fn compute_bridge(xi: &Matrix, xj: &Matrix) -> Result<BridgeResult> {
    if xi.cols() != xj.cols() {
        return Err(Error::Shape {
            op: "compute_bridge",
            lhs: xi.shape(),
            rhs: xj.shape(),
        });
    }
    let gram = xi.matmul_transpose(xi)?;
    let cross = xj.matmul_transpose(xi)?;
    let e = cross.matmul(&pinv(&gram)?)?;
    let svd = svd_full(&e)?;
    Ok(BridgeResult { e, svd })
}

/// One shrinkage step between data layers `i` (front) and `j` (back).
///
/// The weight of layer `i + 1` becomes `W Vᵀ` and the weight of layer `j`
/// becomes `U W`, with `U`, `V` from the bridge of `X_i` and `X_j` held in
/// `cache`. Weight indices here are 1-based as data layers are: weight `k`
/// lives at `params.layers()[k - 1]`.
pub fn sinl_pair_update(params: &NetworkParams, cache: &ForwardCache, i: usize, j: usize) -> Result<NetworkParams> {
    let depth = params.depth();
    if j > depth || j < i + 2 {
        return Err(Error::param(format!(
            "pair update needs 0 <= i, i + 2 <= j <= {depth}; got i={i}, j={j}"
        )));
    }
    if cache.post_acts.len() != depth {
        return Err(Error::Shape {
            op: "sinl_pair_update (cache depth)",
            lhs: (depth, 0),
            rhs: (cache.post_acts.len(), 0),
        });
    }
    let dims = params.dims();
    let (xi, xj) = (cache.data_layer(i), cache.data_layer(j));
    for (k, x) in [(i, xi), (j, xj)] {
        if x.rows() != dims[k] {
            return Err(Error::Shape {
                op: "sinl_pair_update (stale cache)",
                lhs: (dims[k], x.cols()),
                rhs: x.shape(),
            });
        }
    }
    let bridge = compute_bridge(xi, xj)?;
    let mut out = params.clone();
    let front = params.layer(i).weight.matmul_transpose(&bridge.svd.v)?;
    let back = bridge.svd.u.matmul(&params.layer(j - 1).weight)?;
    out.set_weight(i, front)?;
    out.set_weight(j - 1, back)?;
    Ok(out)
}

/// Replaces weight `mid_idx` (0-based layer index) by its orthogonal polar factor.
pub fn median_normalize(params: &NetworkParams, mid_idx: usize) -> Result<NetworkParams> {
    if mid_idx >= params.depth() {
        return Err(Error::param(format!(
            "median index {mid_idx} out of range for depth {}",
            params.depth()
        )));
    }
    let mut out = params.clone();
    out.set_weight(mid_idx, orthogonal_factor(&params.layer(mid_idx).weight)?)?;
    Ok(out)
}

/// One action taken by [`init_sinl_traced`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinlStep {
    /// Bridge between data layers `front` and `back`; rotates layers
    /// `front` and `back - 1` (0-based).
    Pair {
        front: usize,
        back: usize,
    },
    /// Polar normalization of layer `layer` (0-based).
    Median {
        layer: usize,
    },
    VarianceNormalization,
}

impl SinlStep {
    /// 0-based layer indices whose weights this step rewrote.
    pub fn touched_layers(&self, depth: usize) -> Vec<usize> {
        match *self {
            SinlStep::Pair { front, back } => vec![front, back - 1],
            SinlStep::Median { layer } => vec![layer],
            SinlStep::VarianceNormalization => (0..depth).collect(),
        }
    }
}

/// Shrinkage initialization.
pub fn init_sinl(dims: &[usize], x0: &Matrix, spec: &InitSpec) -> Result<NetworkParams> {
    init_sinl_traced(dims, x0, spec).map(|(p, _)| p)
}

/// [`init_sinl`] that also reports every step it took, in order.
pub fn init_sinl_traced(dims: &[usize], x0: &Matrix, spec: &InitSpec) -> Result<(NetworkParams, Vec<SinlStep>)> {
    check_dims(dims)?;
    check_input(dims, x0)?;
    let mut params = init_random(dims, spec)?;
    let mut steps = Vec::new();

    let (mut i, mut j) = (0, params.depth());
    while j >= i + 2 {
        // the data is refreshed before every bridge so inner pairs see the rotated outer layers
        let cache = forward(&params, x0, Dropout::Off)?;
        params = sinl_pair_update(&params, &cache, i, j)?;
        steps.push(SinlStep::Pair { front: i, back: j });
        i += 1;
        j -= 1;
    }
    if j == i + 1 {
        params = median_normalize(&params, i)?;
        steps.push(SinlStep::Median { layer: i });
    }
    if spec.attach_bn {
        params = normalize_output_variance(params, x0, spec)?;
        steps.push(SinlStep::VarianceNormalization);
    }
    Ok((params, steps))
}

/// Dispatches on `spec.scheme`.
pub fn initialize(dims: &[usize], x0: &Matrix, spec: &InitSpec) -> Result<NetworkParams> {
    match spec.scheme {
        Scheme::Random => init_random(dims, spec),
        Scheme::Bn => init_bn(dims, x0, spec),
        Scheme::Din => init_din(dims, spec),
        Scheme::Lsuv => init_lsuv(dims, x0, spec),
        Scheme::Sinl => init_sinl(dims, x0, spec),
    }
}
