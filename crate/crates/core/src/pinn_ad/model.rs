use serde::{Deserialize, Serialize};

use super::dataset::AdDataset;
use super::loss::{ad_losses, ad_losses_with_adjoints, AdLosses, CoefficientField, SurrogateFields};
use crate::error::{Error, Result};
use crate::fraccalc::{history_term, l1_coefficients, FracOrder};
use crate::nn::{
    forward_jets, sigmoid, softplus, Activation, Checkpoint, JetLayout, JetTape, Mlp, MlpSpec, NetworkCheckpoint,
};
use crate::sim::{explicit_step_scale, explicit_update, g_operator};

/// Hidden-layer widths of the concentration (θ) and coefficient (φ) networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdArchitecture {
    pub theta_hidden: Vec<usize>,
    pub phi_hidden: Vec<usize>,
}

impl Default for AdArchitecture {
    fn default() -> Self {
        AdArchitecture {
            theta_hidden: vec![16; 4],
            phi_hidden: vec![4; 2],
        }
    }
}

/// Affine map of one physical coordinate onto the network input: (v - lo) / span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisScale {
    pub lo: f64,
    pub span: f64,
}

impl AxisScale {
    fn covering(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let span = hi - lo;
        AxisScale {
            lo,
            span: if span > 0.0 { span } else { 1.0 },
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.lo) / self.span
    }
}

/// θ: (t, x, y) → c, φ: c/σ_c → raw coefficient, and the raw fractional order.
///
/// The effective order is sigmoid(alpha_raw) and the effective coefficient is
/// softplus(φ).
#[derive(Debug, Clone, PartialEq)]
pub struct AdModel {
    pub theta: Mlp,
    pub phi: Mlp,
    pub alpha_raw: f64,
    /// σ_c of the training data; φ sees c / c_scale.
    pub c_scale: f64,
    pub t_scale: AxisScale,
    pub x_scale: AxisScale,
    pub y_scale: AxisScale,
}

const THETA_LAYOUT_DIRS: [usize; 2] = [1, 2];

impl AdModel {
    /// Fresh model scaled to `dataset`: Glorot weights, α = 0.5.
    pub fn init(arch: &AdArchitecture, dataset: &AdDataset, seed: u64) -> Result<Self> {
        let theta = MlpSpec::new(3, arch.theta_hidden.clone(), 1, Activation::Swish)?;
        let phi = MlpSpec::new(1, arch.phi_hidden.clone(), 1, Activation::Swish)?;
        Ok(AdModel {
            theta: Mlp::init(theta, seed),
            phi: Mlp::init(phi, seed.wrapping_add(0x9E37_79B9_7F4A_7C15)),
            alpha_raw: 0.0,
            c_scale: dataset.sigma_c(),
            t_scale: AxisScale::covering(dataset.times().iter().copied()),
            x_scale: AxisScale::covering(dataset.locations().iter().map(|l| l.0)),
            y_scale: AxisScale::covering(dataset.locations().iter().map(|l| l.1)),
        })
    }

    pub fn alpha(&self) -> f64 {
        sigmoid(self.alpha_raw)
    }

    pub fn frac_order(&self) -> Result<FracOrder> {
        FracOrder::new(self.alpha())
    }

    pub fn n_trainable(&self) -> usize {
        self.theta.params.len() + self.phi.params.len() + 1
    }

    /// θ parameters, then φ parameters, then alpha_raw.
    pub fn trainable(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_trainable());
        v.extend_from_slice(self.theta.params.as_slice());
        v.extend_from_slice(self.phi.params.as_slice());
        v.push(self.alpha_raw);
        v
    }

    pub fn set_trainable(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.n_trainable() {
            return Err(Error::Shape(format!("expected {} trainables, got {}", self.n_trainable(), v.len())));
        }
        let nt = self.theta.params.len();
        let np = self.phi.params.len();
        self.theta.params.as_mut_slice().copy_from_slice(&v[..nt]);
        self.phi.params.as_mut_slice().copy_from_slice(&v[nt..nt + np]);
        self.alpha_raw = v[nt + np];
        Ok(())
    }

    fn theta_input(&self, t: f64, x: f64, y: f64) -> [f64; 3] {
        [self.t_scale.apply(t), self.x_scale.apply(x), self.y_scale.apply(y)]
    }

    /// Effective D̃ and dD̃/dc at each concentration.
    pub fn diffusion_with_derivative(&self, c: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let v: Vec<f64> = c.iter().map(|&c| c / self.c_scale).collect();
        let tape = forward_jets(&self.phi.spec, self.phi.params.as_slice(), &v, &JetLayout::new(vec![0], 1))?;
        let (q, q1) = (tape.output(0, 0), tape.output(0, 1));
        let d = q.iter().map(|&q| softplus(q)).collect();
        let dc = q.iter().zip(q1).map(|(&q, &q1)| sigmoid(q) * q1 / self.c_scale).collect();
        Ok((d, dc))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::default();
        for (name, net) in [("theta", &self.theta), ("phi", &self.phi)] {
            ck.networks.insert(
                name.into(),
                NetworkCheckpoint {
                    spec: net.spec.clone(),
                    params: net.params.clone(),
                },
            );
        }
        for (name, v) in [
            ("alpha_raw", self.alpha_raw),
            ("c_scale", self.c_scale),
            ("t_lo", self.t_scale.lo),
            ("t_span", self.t_scale.span),
            ("x_lo", self.x_scale.lo),
            ("x_span", self.x_scale.span),
            ("y_lo", self.y_scale.lo),
            ("y_span", self.y_scale.span),
        ] {
            ck.scalars.insert(name.into(), v);
        }
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let net = |name: &str| -> Result<Mlp> {
            let n = ck.network(name)?;
            Mlp::new(n.spec.clone(), n.params.clone())
        };
        let axis = |lo: &str, span: &str| -> Result<AxisScale> {
            Ok(AxisScale {
                lo: ck.scalar(lo)?,
                span: ck.scalar(span)?,
            })
        };
        Ok(AdModel {
            theta: net("theta")?,
            phi: net("phi")?,
            alpha_raw: ck.scalar("alpha_raw")?,
            c_scale: ck.scalar("c_scale")?,
            t_scale: axis("t_lo", "t_span")?,
            x_scale: axis("x_lo", "x_span")?,
            y_scale: axis("y_lo", "y_span")?,
        })
    }
}

/// Forward caches of one model evaluation over a whole dataset.
struct Evaluation {
    theta_tape: JetTape,
    phi_tape: JetTape,
    fields: SurrogateFields,
    coef: CoefficientField,
}

/// θ inputs for every dataset sample, location-major.
pub(crate) fn theta_inputs(model: &AdModel, dataset: &AdDataset) -> Vec<f64> {
    let mut out = Vec::with_capacity(dataset.len() * 3);
    for &(x, y) in dataset.locations() {
        for &t in dataset.times() {
            out.extend(model.theta_input(t, x, y));
        }
    }
    out
}

fn evaluate(model: &AdModel, inputs: &[f64]) -> Result<Evaluation> {
    let layout = JetLayout::new(THETA_LAYOUT_DIRS.to_vec(), 2);
    let theta_tape = forward_jets(&model.theta.spec, model.theta.params.as_slice(), inputs, &layout)?;
    let (sx, sy) = (model.x_scale.span, model.y_scale.span);
    let fields = SurrogateFields {
        value: theta_tape.output(0, 0).to_vec(),
        cx: theta_tape.output(0, layout.first(0)).iter().map(|v| v / sx).collect(),
        cy: theta_tape.output(0, layout.first(1)).iter().map(|v| v / sy).collect(),
        cxx: theta_tape.output(0, layout.second(0)).iter().map(|v| v / (sx * sx)).collect(),
        cyy: theta_tape.output(0, layout.second(1)).iter().map(|v| v / (sy * sy)).collect(),
    };
    let v: Vec<f64> = fields.value.iter().map(|&c| c / model.c_scale).collect();
    let phi_tape = forward_jets(&model.phi.spec, model.phi.params.as_slice(), &v, &JetLayout::new(vec![0], 1))?;
    let (q, q1) = (phi_tape.output(0, 0), phi_tape.output(0, 1));
    let coef = CoefficientField {
        d: q.iter().map(|&q| softplus(q)).collect(),
        d_c: q.iter().zip(q1).map(|(&q, &q1)| sigmoid(q) * q1 / model.c_scale).collect(),
    };
    Ok(Evaluation {
        theta_tape,
        phi_tape,
        fields,
        coef,
    })
}

/// Losses of `model` on `dataset` with precomputed θ inputs.
pub(crate) fn losses_at(model: &AdModel, dataset: &AdDataset, inputs: &[f64]) -> Result<AdLosses> {
    let ev = evaluate(model, inputs)?;
    ad_losses(dataset, &ev.fields, &ev.coef, model.frac_order()?)
}

/// Losses and their gradient with respect to [`AdModel::trainable`].
pub(crate) fn loss_gradient_at(model: &AdModel, dataset: &AdDataset, inputs: &[f64]) -> Result<(AdLosses, Vec<f64>)> {
    let ev = evaluate(model, inputs)?;
    let alpha = model.frac_order()?;
    let (losses, adj) = ad_losses_with_adjoints(dataset, &ev.fields, &ev.coef, alpha)?;
    let n = dataset.len();
    let s = model.c_scale;

    // D̃ = softplus(q), D̃_c = sigmoid(q) q' / s
    let (q, q1) = (ev.phi_tape.output(0, 0), ev.phi_tape.output(0, 1));
    let mut phi_adj = ev.phi_tape.adjoint_buffer();
    {
        let mut aq = vec![0.0; n];
        let mut aq1 = vec![0.0; n];
        for i in 0..n {
            let sg = sigmoid(q[i]);
            aq[i] = adj.coef.d[i] * sg + adj.coef.d_c[i] * sg * (1.0 - sg) * q1[i] / s;
            aq1[i] = adj.coef.d_c[i] * sg / s;
        }
        phi_adj.component_mut(0, 0).copy_from_slice(&aq);
        phi_adj.component_mut(0, 1).copy_from_slice(&aq1);
    }
    let n_theta = model.theta.params.len();
    let n_phi = model.phi.params.len();
    let mut grad = vec![0.0; n_theta + n_phi + 1];
    let v_adj = ev.phi_tape.backward(model.phi.params.as_slice(), &phi_adj, &mut grad[n_theta..n_theta + n_phi]);

    let layout = ev.theta_tape.layout().clone();
    let (sx, sy) = (model.x_scale.span, model.y_scale.span);
    let mut theta_adj = ev.theta_tape.adjoint_buffer();
    {
        let value = theta_adj.component_mut(0, 0);
        for i in 0..n {
            value[i] = adj.fields.value[i] + v_adj[i] / s;
        }
    }
    let scaled = |src: &[f64], f: f64| -> Vec<f64> { src.iter().map(|v| v / f).collect() };
    theta_adj.component_mut(0, layout.first(0)).copy_from_slice(&scaled(&adj.fields.cx, sx));
    theta_adj.component_mut(0, layout.first(1)).copy_from_slice(&scaled(&adj.fields.cy, sy));
    theta_adj.component_mut(0, layout.second(0)).copy_from_slice(&scaled(&adj.fields.cxx, sx * sx));
    theta_adj.component_mut(0, layout.second(1)).copy_from_slice(&scaled(&adj.fields.cyy, sy * sy));
    ev.theta_tape.backward(model.theta.params.as_slice(), &theta_adj, &mut grad[..n_theta]);

    let a = alpha.value();
    grad[n_theta + n_phi] = adj.alpha * a * (1.0 - a);
    Ok((losses, grad))
}

/// All loss components of `model` on `dataset`.
pub fn evaluate_losses(model: &AdModel, dataset: &AdDataset) -> Result<AdLosses> {
    losses_at(model, dataset, &theta_inputs(model, dataset))
}

/// Losses and the gradient with respect to [`AdModel::trainable`].
pub fn loss_gradient(model: &AdModel, dataset: &AdDataset) -> Result<(AdLosses, Vec<f64>)> {
    loss_gradient_at(model, dataset, &theta_inputs(model, dataset))
}

/// mean |c^pu - c|² / σ_c² over all samples.
pub fn data_loss_ad(model: &AdModel, dataset: &AdDataset) -> Result<f64> {
    Ok(evaluate_losses(model, dataset)?.data)
}

/// mean |c^pi - c^pu|² / σ_c² over every sample with t ≥ t_1.
pub fn consistency_loss_ad(model: &AdModel, dataset: &AdDataset) -> Result<f64> {
    Ok(evaluate_losses(model, dataset)?.consistency)
}

/// Unit-weighted sum of the data and consistency losses.
pub fn total_loss_ad(model: &AdModel, dataset: &AdDataset) -> Result<f64> {
    Ok(evaluate_losses(model, dataset)?.total)
}

/// `D̃ (c_xx + c_yy) + D̃_c (c_x² + c_y²)` from the networks at one point.
pub fn g_term(model: &AdModel, point: (f64, f64, f64)) -> Result<f64> {
    let input = model.theta_input(point.0, point.1, point.2);
    let layout = JetLayout::new(THETA_LAYOUT_DIRS.to_vec(), 2);
    let tape = forward_jets(&model.theta.spec, model.theta.params.as_slice(), &input, &layout)?;
    let (sx, sy) = (model.x_scale.span, model.y_scale.span);
    let c = tape.output(0, 0)[0];
    let (d, dc) = model.diffusion_with_derivative(&[c])?;
    Ok(g_operator(
        d[0],
        dc[0],
        tape.output(0, layout.first(0))[0] / sx,
        tape.output(0, layout.first(1))[0] / sy,
        tape.output(0, layout.second(0))[0] / (sx * sx),
        tape.output(0, layout.second(1))[0] / (sy * sy),
    ))
}

/// c^pi(t_{k+1}) at (x, y): `Γ(2-α) dt^α g(t_k) + h(c^pu, t_k)` on the dataset's
/// time grid.
pub fn physics_informed_concentration(model: &AdModel, location: (f64, f64), k: usize, dataset: &AdDataset) -> Result<f64> {
    if k + 1 >= dataset.n_times() {
        return Err(Error::Index(format!(
            "step {} is beyond the dataset's last time level {}",
            k + 1,
            dataset.n_times() - 1
        )));
    }
    let times = &dataset.times()[..=k];
    let inputs: Vec<f64> = times.iter().flat_map(|&t| model.theta_input(t, location.0, location.1)).collect();
    let tape = forward_jets(&model.theta.spec, model.theta.params.as_slice(), &inputs, &JetLayout::values())?;
    let hist = tape.output(0, 0);
    let alpha = model.frac_order()?;
    let h = history_term(hist, &l1_coefficients(alpha, k))?;
    let g = g_term(model, (times[k], location.0, location.1))?;
    Ok(explicit_update(explicit_step_scale(alpha, dataset.dt())?, g, h))
}

/// Effective D̃ at each concentration.
pub fn predict_diffusion_curve(model: &AdModel, c_values: &[f64]) -> Result<Vec<f64>> {
    if c_values.is_empty() {
        return Ok(Vec::new());
    }
    Ok(model.diffusion_with_derivative(c_values)?.0)
}

/// θ-network concentrations at every dataset sample, location-major.
pub fn predict_concentrations(model: &AdModel, dataset: &AdDataset) -> Result<Vec<f64>> {
    let tape = forward_jets(
        &model.theta.spec,
        model.theta.params.as_slice(),
        &theta_inputs(model, dataset),
        &JetLayout::values(),
    )?;
    Ok(tape.output(0, 0).to_vec())
}
