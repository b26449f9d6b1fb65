//! Differentiable multilayer perceptrons.
//!
//! Parameter gradients come from a reverse pass over batched forward jets
//! (see [`forward_jets`]); losses that are arbitrary closures over network
//! outputs go through the scalar [`Tape`] first and hand their output
//! adjoints to the same reverse pass.

mod checkpoint;
mod mlp;
mod tape;

pub use checkpoint::{Checkpoint, NetworkCheckpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use mlp::{
    forward_jets, init_params, sigmoid, softplus, Activation, JetLayout, JetTape, MlpSpec, OutputAdjoint, ParamVector,
};
pub use tape::{Tape, Var};

use crate::error::{Error, Result};

/// A network shape together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub params: ParamVector,
}

impl Mlp {
    pub fn new(spec: MlpSpec, params: ParamVector) -> Result<Self> {
        mlp::check_params(&spec, params.as_slice())?;
        Ok(Mlp { spec, params })
    }

    pub fn init(spec: MlpSpec, seed: u64) -> Self {
        let params = init_params(&spec, seed);
        Mlp { spec, params }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        mlp_forward(&self.spec, &self.params, x)
    }
}

fn check_input(spec: &MlpSpec, x: &[f64]) -> Result<()> {
    if x.len() != spec.input_dim {
        return Err(Error::Shape(format!("input has {} entries, network expects {}", x.len(), spec.input_dim)));
    }
    Ok(())
}

/// Network output at a single input.
pub fn mlp_forward(spec: &MlpSpec, params: &ParamVector, x: &[f64]) -> Result<Vec<f64>> {
    check_input(spec, x)?;
    let tape = forward_jets(spec, params.as_slice(), x, &JetLayout::values())?;
    Ok((0..spec.output_dim).map(|u| tape.output(u, 0)[0]).collect())
}

/// Input-space derivatives at a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDerivatives {
    pub value: Vec<f64>,
    /// `first[u][i]` = ∂out_u/∂x_i
    pub first: Vec<Vec<f64>>,
    /// ∂²out/∂x_i² for scalar-output networks (order 2 only).
    pub second: Option<Vec<f64>>,
}

/// First (and for `order == 2` pure second) derivatives of the network
/// output with respect to every input coordinate.
pub fn input_derivatives(spec: &MlpSpec, params: &ParamVector, x: &[f64], order: u8) -> Result<InputDerivatives> {
    check_input(spec, x)?;
    if !(1..=2).contains(&order) {
        return Err(Error::Unsupported(format!("input derivative order {order}")));
    }
    if order == 2 && spec.output_dim != 1 {
        return Err(Error::Unsupported(format!(
            "second input derivatives need a scalar output, network has {}",
            spec.output_dim
        )));
    }
    let layout = JetLayout::new((0..spec.input_dim).collect(), order);
    let tape = forward_jets(spec, params.as_slice(), x, &layout)?;
    let value = (0..spec.output_dim).map(|u| tape.output(u, 0)[0]).collect();
    let first = (0..spec.output_dim)
        .map(|u| (0..spec.input_dim).map(|d| tape.output(u, layout.first(d))[0]).collect())
        .collect();
    let second = (order == 2).then(|| (0..spec.input_dim).map(|d| tape.output(0, layout.second(d))[0]).collect());
    Ok(InputDerivatives { value, first, second })
}

/// Everything one evaluation can report.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub value: Vec<f64>,
    /// ∂out/∂params for scalar-output networks.
    pub param_grad: Option<ParamVector>,
    pub input_jet: Option<InputDerivatives>,
}

/// Evaluates the network once, optionally with its parameter gradient and
/// input derivatives up to `input_order` (0 = none).
pub fn evaluate(spec: &MlpSpec, params: &ParamVector, x: &[f64], param_grad: bool, input_order: u8) -> Result<EvalRecord> {
    check_input(spec, x)?;
    let input_jet = match input_order {
        0 => None,
        o => Some(input_derivatives(spec, params, x, o)?),
    };
    let param_grad = if param_grad {
        if spec.output_dim != 1 {
            return Err(Error::Unsupported("parameter gradient of a vector output".into()));
        }
        let (_, g) = grad_params(spec, params, &[x.to_vec()], |outs| outs[0])?;
        Some(g)
    } else {
        None
    };
    Ok(EvalRecord {
        value: mlp_forward(spec, params, x)?,
        param_grad,
        input_jet,
    })
}

/// Value and exact parameter gradient of `loss`, a closure receiving the
/// network outputs at every point of `inputs` (flattened point-major, so
/// output `u` of point `p` sits at `p * output_dim + u`).
pub fn grad_params<F>(spec: &MlpSpec, params: &ParamVector, inputs: &[Vec<f64>], loss: F) -> Result<(f64, ParamVector)>
where
    F: for<'t> FnOnce(&[Var<'t>]) -> Var<'t>,
{
    let mut flat = Vec::with_capacity(inputs.len() * spec.input_dim);
    for x in inputs {
        check_input(spec, x)?;
        flat.extend_from_slice(x);
    }
    let jets = forward_jets(spec, params.as_slice(), &flat, &JetLayout::values())?;
    let tape = Tape::new();
    let outs: Vec<Var<'_>> = (0..inputs.len())
        .flat_map(|p| (0..spec.output_dim).map(move |u| (p, u)))
        .map(|(p, u)| tape.var(jets.output(u, 0)[p]))
        .collect();
    let total = loss(&outs);
    let adj = tape.gradient(total)?;
    let mut out_adj = jets.adjoint_buffer();
    for u in 0..spec.output_dim {
        let buf = out_adj.component_mut(u, 0);
        for (p, slot) in buf.iter_mut().enumerate() {
            *slot = adj[outs[p * spec.output_dim + u].index()];
        }
    }
    let mut grad = ParamVector::zeros(spec.param_count());
    jets.backward(params.as_slice(), &out_adj, grad.as_mut_slice());
    Ok((total.value(), grad))
}
