//! Fully connected networks and a batched jet engine.
//!
//! A forward pass carries, for every sample in the batch, the network value
//! together with first derivatives along selected input axes and (optionally)
//! the pure second derivatives along the same axes. The reverse pass takes
//! adjoints for every carried component and returns parameter gradients plus
//! adjoints of the input values, so losses built from c, ∂c/∂x and ∂²c/∂x²
//! differentiate exactly with respect to the weights.
//!
//! Parameter layout, layer by layer from the input side: the weight matrix
//! W[out][in] in row-major order, followed by the bias vector b[out].

use ndarray::linalg::general_mat_mul;
use ndarray::{ArrayView2, ArrayViewMut2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// x·sigmoid(x)
    Swish,
    Identity,
}

/// Network shape. Hidden layers use `activation`, the output layer is linear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden: Vec<usize>, output_dim: usize, activation: Activation) -> Result<Self> {
        let spec = MlpSpec {
            input_dim,
            hidden,
            output_dim,
            activation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.iter().any(|&w| w == 0) {
            return Err(Error::Shape(format!("all layer widths must be at least 1: {self:?}")));
        }
        Ok(())
    }

    /// (fan_in, fan_out) of every affine layer.
    pub fn layers(&self) -> Vec<(usize, usize)> {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(self.input_dim);
        widths.extend_from_slice(&self.hidden);
        widths.push(self.output_dim);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|&(i, o)| i * o + o).sum()
    }
}

/// Flat parameter vector in the documented layer-major layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(n: usize) -> Self {
        ParamVector(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn check_params(spec: &MlpSpec, params: &[f64]) -> Result<()> {
    spec.validate()?;
    if params.len() != spec.param_count() {
        return Err(Error::Shape(format!(
            "parameter vector has {} entries, network needs {}",
            params.len(),
            spec.param_count()
        )));
    }
    Ok(())
}

/// Glorot-uniform weights (bounds ±sqrt(6/(fan_in+fan_out))) and zero biases.
pub fn init_params(spec: &MlpSpec, seed: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(spec.param_count());
    for (fan_in, fan_out) in spec.layers() {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        out.extend((0..fan_in * fan_out).map(|_| rng.random_range(-bound..=bound)));
        out.extend(std::iter::repeat_n(0.0, fan_out));
    }
    ParamVector(out)
}

/// Logistic function, evaluated without overflow for large |v|.
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^v), evaluated without overflow for large |v|.
pub fn softplus(v: f64) -> f64 {
    v.max(0.0) + (-v.abs()).exp().ln_1p()
}

/// Activation value and its first three derivatives.
#[inline]
fn activation_derivs(act: Activation, v: f64) -> [f64; 4] {
    match act {
        Activation::Identity => [v, 1.0, 0.0, 0.0],
        Activation::Swish => {
            let s = sigmoid(v);
            let q = s * (1.0 - s);
            let m = 1.0 - 2.0 * s;
            [
                v * s,
                s * (1.0 + v * (1.0 - s)),
                q * (2.0 + v * m),
                q * (m * (3.0 + v * m) - 2.0 * v * q),
            ]
        }
    }
}

/// Which input-space derivatives a jet pass carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetLayout {
    /// Input axes to differentiate along.
    pub dirs: Vec<usize>,
    /// 0 = values only, 1 = plus first derivatives, 2 = plus pure second derivatives.
    pub order: u8,
}

impl JetLayout {
    pub fn values() -> Self {
        JetLayout { dirs: Vec::new(), order: 0 }
    }

    pub fn new(dirs: Vec<usize>, order: u8) -> Self {
        let dirs = if order == 0 { Vec::new() } else { dirs };
        JetLayout { dirs, order }
    }

    pub fn components(&self) -> usize {
        1 + self.dirs.len() * self.order as usize
    }

    /// Component index of ∂/∂x_{dirs[d]}.
    pub fn first(&self, d: usize) -> usize {
        1 + d
    }

    /// Component index of ∂²/∂x_{dirs[d]}².
    pub fn second(&self, d: usize) -> usize {
        1 + self.dirs.len() + d
    }
}

/// Forward caches of a batched jet pass.
#[derive(Debug, Clone)]
pub struct JetTape {
    layout: JetLayout,
    batch: usize,
    /// acts[0] is the input jet, acts[l + 1] the output of affine layer l
    /// (after activation for hidden layers).
    acts: Vec<Vec<f64>>,
    /// Pre-activations of hidden layers.
    pre: Vec<Vec<f64>>,
    layers: Vec<(usize, usize)>,
    activation: Activation,
}

impl JetTape {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn layout(&self) -> &JetLayout {
        &self.layout
    }

    /// Component `comp` of output unit `unit` for every sample.
    pub fn output(&self, unit: usize, comp: usize) -> &[f64] {
        let out = self.acts.last().expect("tape has an output layer");
        let ncols = self.layout.components() * self.batch;
        let start = unit * ncols + comp * self.batch;
        &out[start..start + self.batch]
    }

    /// Zeroed adjoint buffer shaped like the output jets.
    pub fn adjoint_buffer(&self) -> OutputAdjoint {
        let (_, out_dim) = *self.layers.last().expect("at least one layer");
        OutputAdjoint {
            batch: self.batch,
            comps: self.layout.components(),
            data: vec![0.0; out_dim * self.layout.components() * self.batch],
        }
    }

    /// Reverse pass. Accumulates parameter gradients into `grad` and returns
    /// the adjoints of the input values as a batch × input_dim row-major array.
    pub fn backward(&self, params: &[f64], adjoint: &OutputAdjoint, grad: &mut [f64]) -> Vec<f64> {
        let b = self.batch;
        let nd = self.layout.dirs.len();
        let order = self.layout.order;
        let ncols = self.layout.components() * b;
        let offsets = layer_offsets(&self.layers);
        let n_layers = self.layers.len();

        let mut zbar = adjoint.data.clone();
        for l in (0..n_layers).rev() {
            let (fan_in, fan_out) = self.layers[l];
            if l + 1 < n_layers {
                // zbar currently holds adjoints of this layer's activations
                let pre = &self.pre[l];
                for row in 0..fan_out {
                    let base = row * ncols;
                    for p in 0..b {
                        let [_, s1, s2, s3] = activation_derivs(self.activation, pre[base + p]);
                        let mut vbar = zbar[base + p] * s1;
                        for d in 0..nd {
                            let ci = base + (1 + d) * b + p;
                            let zd = pre[ci];
                            let abar_d = zbar[ci];
                            vbar += abar_d * s2 * zd;
                            let mut zbar_d = abar_d * s1;
                            if order == 2 {
                                let cii = base + (1 + nd + d) * b + p;
                                let zdd = pre[cii];
                                let abar_dd = zbar[cii];
                                vbar += abar_dd * (s3 * zd * zd + s2 * zdd);
                                zbar_d += abar_dd * 2.0 * s2 * zd;
                                zbar[cii] = abar_dd * s1;
                            }
                            zbar[ci] = zbar_d;
                        }
                        zbar[base + p] = vbar;
                    }
                }
            }
            let (w_off, b_off) = offsets[l];
            let a_in = &self.acts[l];
            let zbar_view = ArrayView2::from_shape((fan_out, ncols), &zbar).expect("adjoint shape");
            let a_view = ArrayView2::from_shape((fan_in, ncols), a_in).expect("activation shape");
            {
                let mut gw = ArrayViewMut2::from_shape((fan_out, fan_in), &mut grad[w_off..w_off + fan_out * fan_in])
                    .expect("weight gradient shape");
                general_mat_mul(1.0, &zbar_view, &a_view.t(), 1.0, &mut gw);
            }
            for row in 0..fan_out {
                let s: f64 = zbar[row * ncols..row * ncols + b].iter().sum();
                grad[b_off + row] += s;
            }
            let w = ArrayView2::from_shape((fan_out, fan_in), &params[w_off..w_off + fan_out * fan_in])
                .expect("weight shape");
            let mut prev = vec![0.0; fan_in * ncols];
            {
                let mut prev_view = ArrayViewMut2::from_shape((fan_in, ncols), &mut prev).expect("adjoint shape");
                general_mat_mul(1.0, &w.t(), &zbar_view, 0.0, &mut prev_view);
            }
            zbar = prev;
        }
        let in_dim = self.layers[0].0;
        let mut xbar = vec![0.0; b * in_dim];
        for i in 0..in_dim {
            for p in 0..b {
                xbar[p * in_dim + i] = zbar[i * ncols + p];
            }
        }
        xbar
    }
}

/// Adjoints of every output component, laid out like [`JetTape::output`].
#[derive(Debug, Clone)]
pub struct OutputAdjoint {
    batch: usize,
    comps: usize,
    data: Vec<f64>,
}

impl OutputAdjoint {
    pub fn component_mut(&mut self, unit: usize, comp: usize) -> &mut [f64] {
        let start = (unit * self.comps + comp) * self.batch;
        &mut self.data[start..start + self.batch]
    }
}

fn layer_offsets(layers: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut off = 0;
    layers
        .iter()
        .map(|&(i, o)| {
            let w = off;
            off += i * o;
            let b = off;
            off += o;
            (w, b)
        })
        .collect()
}

/// Batched forward pass carrying input-space jets.
///
/// `inputs` is batch × input_dim, row-major.
pub fn forward_jets(spec: &MlpSpec, params: &[f64], inputs: &[f64], layout: &JetLayout) -> Result<JetTape> {
    check_params(spec, params)?;
    if inputs.len() % spec.input_dim != 0 {
        return Err(Error::Shape(format!(
            "input buffer of {} values is not a multiple of input_dim {}",
            inputs.len(),
            spec.input_dim
        )));
    }
    if layout.order > 2 {
        return Err(Error::Unsupported(format!("jet order {} (max 2)", layout.order)));
    }
    if let Some(&d) = layout.dirs.iter().find(|&&d| d >= spec.input_dim) {
        return Err(Error::Shape(format!("derivative axis {d} out of range for input_dim {}", spec.input_dim)));
    }
    let b = inputs.len() / spec.input_dim;
    let nd = layout.dirs.len();
    let order = layout.order;
    let ncols = layout.components() * b;
    let layers = spec.layers();
    let offsets = layer_offsets(&layers);

    let mut input_jet = vec![0.0; spec.input_dim * ncols];
    for i in 0..spec.input_dim {
        for p in 0..b {
            input_jet[i * ncols + p] = inputs[p * spec.input_dim + i];
        }
    }
    for (d, &axis) in layout.dirs.iter().enumerate() {
        let start = axis * ncols + (1 + d) * b;
        input_jet[start..start + b].fill(1.0);
    }

    let mut acts = vec![input_jet];
    let mut pre = Vec::with_capacity(layers.len().saturating_sub(1));
    for (l, &(fan_in, fan_out)) in layers.iter().enumerate() {
        let (w_off, b_off) = offsets[l];
        let w = ArrayView2::from_shape((fan_out, fan_in), &params[w_off..w_off + fan_out * fan_in])
            .expect("weight shape");
        let a = ArrayView2::from_shape((fan_in, ncols), acts.last().expect("input jet")).expect("activation shape");
        let mut z = vec![0.0; fan_out * ncols];
        {
            let mut zv = ArrayViewMut2::from_shape((fan_out, ncols), &mut z).expect("pre-activation shape");
            general_mat_mul(1.0, &w, &a, 0.0, &mut zv);
        }
        for row in 0..fan_out {
            let bias = params[b_off + row];
            for v in &mut z[row * ncols..row * ncols + b] {
                *v += bias;
            }
        }
        if let Some(bad) = z[..].iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(
                format!("layer {l} affine map"),
                format!("non-finite value at row {}", bad / ncols),
            ));
        }
        if l + 1 == layers.len() {
            acts.push(z);
            break;
        }
        let mut out = vec![0.0; fan_out * ncols];
        for row in 0..fan_out {
            let base = row * ncols;
            for p in 0..b {
                let [s0, s1, s2, _] = activation_derivs(spec.activation, z[base + p]);
                out[base + p] = s0;
                for d in 0..nd {
                    let ci = base + (1 + d) * b + p;
                    out[ci] = s1 * z[ci];
                    if order == 2 {
                        let cii = base + (1 + nd + d) * b + p;
                        out[cii] = s2 * z[ci] * z[ci] + s1 * z[cii];
                    }
                }
            }
        }
        pre.push(z);
        acts.push(out);
    }
    Ok(JetTape {
        layout: layout.clone(),
        batch: b,
        acts,
        pre,
        layers,
        activation: spec.activation,
    })
}
