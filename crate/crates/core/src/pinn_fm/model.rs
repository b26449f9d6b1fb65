use serde::{Deserialize, Serialize};

use super::dataset::RheoDataset;
use crate::error::{Error, Result};
use crate::fraccalc::{
    history_adjoint, history_alpha_derivative, history_term, l1_coefficient_alpha_derivatives, l1_coefficients,
    l1_prefactor, l1_prefactor_log_alpha_derivative, relaxation_modulus, CompensatedSum, FracOrder, MittagLefflerOrder,
};
use crate::metrics::scaled_mse;
use crate::stats::mean;
use crate::nn::{forward_jets, sigmoid, Activation, Checkpoint, JetLayout, JetTape, Mlp, MlpSpec, NetworkCheckpoint};

/// Hidden-layer widths of the stress (β) and strain (ζ) networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FmArchitecture {
    pub beta_hidden: Vec<usize>,
    pub zeta_hidden: Vec<usize>,
}

impl Default for FmArchitecture {
    fn default() -> Self {
        FmArchitecture {
            beta_hidden: vec![20; 2],
            zeta_hidden: vec![20; 2],
        }
    }
}

/// β and ζ map t/t_max to standardized stress and strain,
/// τ^pu = tau_shift + tau_scale·β and ε^pu = eps_shift + eps_scale·ζ.
///
/// Effective values are κ = exp(kappa_raw), η = exp(eta_raw) and
/// ν = sigmoid(nu_raw).
#[derive(Debug, Clone, PartialEq)]
pub struct FmModel {
    pub beta: Mlp,
    pub zeta: Mlp,
    pub kappa_raw: f64,
    pub eta_raw: f64,
    pub nu_raw: f64,
    pub t_max: f64,
    pub tau_shift: f64,
    pub tau_scale: f64,
    pub eps_shift: f64,
    pub eps_scale: f64,
}

/// Loss components of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmLosses {
    pub data: f64,
    pub consistency: f64,
    pub total: f64,
}

/// Effective material parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmParameters {
    pub kappa: f64,
    pub eta: f64,
    pub nu: f64,
}

impl FmModel {
    /// Fresh model scaled to `dataset` with κ = η = 1 and ν = 0.5.
    pub fn init(arch: &FmArchitecture, dataset: &RheoDataset, seed: u64) -> Result<Self> {
        let beta = MlpSpec::new(1, arch.beta_hidden.clone(), 1, Activation::Swish)?;
        let zeta = MlpSpec::new(1, arch.zeta_hidden.clone(), 1, Activation::Swish)?;
        let t_max = dataset.t_max();
        Ok(FmModel {
            beta: Mlp::init(beta, seed),
            zeta: Mlp::init(zeta, seed.wrapping_add(0x9E37_79B9_7F4A_7C15)),
            kappa_raw: 0.0,
            eta_raw: 0.0,
            nu_raw: 0.0,
            t_max: if t_max > 0.0 { t_max } else { 1.0 },
            tau_shift: mean(dataset.stress()),
            tau_scale: dataset.sigma_tau(),
            eps_shift: mean(dataset.strain()),
            eps_scale: dataset.sigma_eps(),
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_raw.exp()
    }

    pub fn eta(&self) -> f64 {
        self.eta_raw.exp()
    }

    pub fn nu(&self) -> f64 {
        sigmoid(self.nu_raw)
    }

    pub fn parameters(&self) -> FmParameters {
        FmParameters {
            kappa: self.kappa(),
            eta: self.eta(),
            nu: self.nu(),
        }
    }

    pub fn n_trainable(&self) -> usize {
        self.beta.params.len() + self.zeta.params.len() + 3
    }

    /// β parameters, ζ parameters, then kappa_raw, eta_raw, nu_raw.
    pub fn trainable(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_trainable());
        v.extend_from_slice(self.beta.params.as_slice());
        v.extend_from_slice(self.zeta.params.as_slice());
        v.extend([self.kappa_raw, self.eta_raw, self.nu_raw]);
        v
    }

    pub fn set_trainable(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.n_trainable() {
            return Err(Error::Shape(format!("expected {} trainables, got {}", self.n_trainable(), v.len())));
        }
        let nb = self.beta.params.len();
        let nz = self.zeta.params.len();
        self.beta.params.as_mut_slice().copy_from_slice(&v[..nb]);
        self.zeta.params.as_mut_slice().copy_from_slice(&v[nb..nb + nz]);
        self.kappa_raw = v[nb + nz];
        self.eta_raw = v[nb + nz + 1];
        self.nu_raw = v[nb + nz + 2];
        Ok(())
    }

    fn inputs(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|t| t / self.t_max).collect()
    }

    /// τ^pu and ε^pu at `times`.
    pub fn surrogates(&self, times: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = self.inputs(times);
        let b = forward_jets(&self.beta.spec, self.beta.params.as_slice(), &x, &JetLayout::values())?;
        let z = forward_jets(&self.zeta.spec, self.zeta.params.as_slice(), &x, &JetLayout::values())?;
        Ok((
            b.output(0, 0).iter().map(|v| self.tau_shift + v * self.tau_scale).collect(),
            z.output(0, 0).iter().map(|v| self.eps_shift + v * self.eps_scale).collect(),
        ))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::default();
        for (name, net) in [("beta", &self.beta), ("zeta", &self.zeta)] {
            ck.networks.insert(
                name.into(),
                NetworkCheckpoint {
                    spec: net.spec.clone(),
                    params: net.params.clone(),
                },
            );
        }
        for (name, v) in [
            ("kappa_raw", self.kappa_raw),
            ("eta_raw", self.eta_raw),
            ("nu_raw", self.nu_raw),
            ("t_max", self.t_max),
            ("tau_shift", self.tau_shift),
            ("tau_scale", self.tau_scale),
            ("eps_shift", self.eps_shift),
            ("eps_scale", self.eps_scale),
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
        Ok(FmModel {
            beta: net("beta")?,
            zeta: net("zeta")?,
            kappa_raw: ck.scalar("kappa_raw")?,
            eta_raw: ck.scalar("eta_raw")?,
            nu_raw: ck.scalar("nu_raw")?,
            t_max: ck.scalar("t_max")?,
            tau_shift: ck.scalar("tau_shift")?,
            tau_scale: ck.scalar("tau_scale")?,
            eps_shift: ck.scalar("eps_shift")?,
            eps_scale: ck.scalar("eps_scale")?,
        })
    }
}

struct Evaluation {
    beta_tape: JetTape,
    zeta_tape: JetTape,
    tau: Vec<f64>,
    eps: Vec<f64>,
}

fn evaluate(model: &FmModel, inputs: &[f64]) -> Result<Evaluation> {
    let beta_tape = forward_jets(&model.beta.spec, model.beta.params.as_slice(), inputs, &JetLayout::values())?;
    let zeta_tape = forward_jets(&model.zeta.spec, model.zeta.params.as_slice(), inputs, &JetLayout::values())?;
    let tau = beta_tape.output(0, 0).iter().map(|v| model.tau_shift + v * model.tau_scale).collect();
    let eps = zeta_tape.output(0, 0).iter().map(|v| model.eps_shift + v * model.eps_scale).collect();
    Ok(Evaluation {
        beta_tape,
        zeta_tape,
        tau,
        eps,
    })
}

/// Adjoints of the total loss with respect to the surrogate values and the
/// three effective parameters.
struct Adjoints {
    tau: Vec<f64>,
    eps: Vec<f64>,
    kappa: f64,
    eta: f64,
    nu: f64,
}

fn frac_order(nu: f64) -> Result<FracOrder> {
    FracOrder::new(nu)
}

/// `κ C (ε_{k+1} - h_k(ε)) - η C (τ_{k+1} - h_k(τ))` over the surrogate values.
fn tau_pi(p: &FmParameters, c: f64, coeffs: &[f64], tau: &[f64], eps: &[f64], k: usize) -> Result<f64> {
    let le = eps[k + 1] - history_term(&eps[..=k], coeffs)?;
    let la = tau[k + 1] - history_term(&tau[..=k], coeffs)?;
    Ok(p.kappa * c * le - p.eta * c * la)
}

fn losses_impl(
    dataset: &RheoDataset,
    tau: &[f64],
    eps: &[f64],
    p: &FmParameters,
    want_adjoints: bool,
) -> Result<(FmLosses, Option<Adjoints>)> {
    let n = dataset.len();
    if tau.len() != n || eps.len() != n {
        return Err(Error::Shape(format!(
            "surrogates have {} and {} samples, dataset has {n}",
            tau.len(),
            eps.len()
        )));
    }
    let (st, se) = (dataset.sigma_tau(), dataset.sigma_eps());
    let data = scaled_mse(tau, dataset.stress(), st)? + scaled_mse(eps, dataset.strain(), se)?;
    let mut adj = want_adjoints.then(|| Adjoints {
        tau: tau
            .iter()
            .zip(dataset.stress())
            .map(|(a, b)| 2.0 * (a - b) / (n as f64 * st * st))
            .collect(),
        eps: eps
            .iter()
            .zip(dataset.strain())
            .map(|(a, b)| 2.0 * (a - b) / (n as f64 * se * se))
            .collect(),
        kappa: 0.0,
        eta: 0.0,
        nu: 0.0,
    });

    let steps = n - 1;
    let order = frac_order(p.nu)?;
    let c = l1_prefactor(order, dataset.dt())?;
    let coeffs = l1_coefficients(order, steps - 1);
    let (dcoeffs, plog) = if want_adjoints {
        (
            l1_coefficient_alpha_derivatives(order, steps - 1),
            l1_prefactor_log_alpha_derivative(order, dataset.dt())?,
        )
    } else {
        (Vec::new(), 0.0)
    };
    let norm = steps as f64 * st * st;
    let (kc, ec) = (p.kappa * c, p.eta * c);
    let mut consistency = CompensatedSum::default();
    for k in 0..steps {
        let le = eps[k + 1] - history_term(&eps[..=k], &coeffs)?;
        let la = tau[k + 1] - history_term(&tau[..=k], &coeffs)?;
        let r = kc * le - ec * la - tau[k + 1];
        consistency.add(r * r / norm);
        let Some(a) = adj.as_mut() else { continue };

        let w = 2.0 * r / norm;
        a.eps[k + 1] += w * kc;
        history_adjoint(&coeffs, k, -w * kc, &mut a.eps);
        a.tau[k + 1] += w * (-ec - 1.0);
        history_adjoint(&coeffs, k, w * ec, &mut a.tau);
        a.kappa += w * c * le;
        a.eta -= w * c * la;
        let dle = -history_alpha_derivative(&dcoeffs, eps, k);
        let dla = -history_alpha_derivative(&dcoeffs, tau, k);
        a.nu += w * (plog * (kc * le - ec * la) + kc * dle - ec * dla);
    }
    let consistency = consistency.value();
    Ok((
        FmLosses {
            data,
            consistency,
            total: data + consistency,
        },
        adj,
    ))
}

/// Data and consistency losses for given surrogate values on the dataset grid.
pub fn fm_losses(dataset: &RheoDataset, tau: &[f64], eps: &[f64], params: &FmParameters) -> Result<FmLosses> {
    Ok(losses_impl(dataset, tau, eps, params, false)?.0)
}

pub(crate) fn time_inputs(model: &FmModel, dataset: &RheoDataset) -> Vec<f64> {
    model.inputs(dataset.times())
}

pub(crate) fn losses_at(model: &FmModel, dataset: &RheoDataset, inputs: &[f64]) -> Result<FmLosses> {
    let ev = evaluate(model, inputs)?;
    Ok(losses_impl(dataset, &ev.tau, &ev.eps, &model.parameters(), false)?.0)
}

pub(crate) fn loss_gradient_at(model: &FmModel, dataset: &RheoDataset, inputs: &[f64]) -> Result<(FmLosses, Vec<f64>)> {
    let ev = evaluate(model, inputs)?;
    let p = model.parameters();
    let (losses, adj) = losses_impl(dataset, &ev.tau, &ev.eps, &p, true)?;
    let adj = adj.expect("adjoints requested");
    let nb = model.beta.params.len();
    let nz = model.zeta.params.len();
    let mut grad = vec![0.0; nb + nz + 3];

    let mut out = ev.beta_tape.adjoint_buffer();
    for (o, a) in out.component_mut(0, 0).iter_mut().zip(&adj.tau) {
        *o = a * model.tau_scale;
    }
    ev.beta_tape.backward(model.beta.params.as_slice(), &out, &mut grad[..nb]);
    let mut out = ev.zeta_tape.adjoint_buffer();
    for (o, a) in out.component_mut(0, 0).iter_mut().zip(&adj.eps) {
        *o = a * model.eps_scale;
    }
    ev.zeta_tape.backward(model.zeta.params.as_slice(), &out, &mut grad[nb..nb + nz]);

    grad[nb + nz] = adj.kappa * p.kappa;
    grad[nb + nz + 1] = adj.eta * p.eta;
    grad[nb + nz + 2] = adj.nu * p.nu * (1.0 - p.nu);
    Ok((losses, grad))
}

/// All loss components of `model` on `dataset`.
pub fn evaluate_losses_fm(model: &FmModel, dataset: &RheoDataset) -> Result<FmLosses> {
    losses_at(model, dataset, &time_inputs(model, dataset))
}

/// Losses and the gradient with respect to [`FmModel::trainable`].
pub fn loss_gradient_fm(model: &FmModel, dataset: &RheoDataset) -> Result<(FmLosses, Vec<f64>)> {
    loss_gradient_at(model, dataset, &time_inputs(model, dataset))
}

/// mean |τ^pu - τ|²/σ_τ² + mean |ε^pu - ε|²/σ_ε².
pub fn data_loss_fm(model: &FmModel, dataset: &RheoDataset) -> Result<f64> {
    Ok(evaluate_losses_fm(model, dataset)?.data)
}

/// mean over k of |τ^pi(t_{k+1}) - τ^pu(t_{k+1})|² / σ_τ².
pub fn consistency_loss_fm(model: &FmModel, dataset: &RheoDataset) -> Result<f64> {
    Ok(evaluate_losses_fm(model, dataset)?.consistency)
}

/// Unit-weighted sum of the data and consistency losses.
pub fn total_loss_fm(model: &FmModel, dataset: &RheoDataset) -> Result<f64> {
    Ok(evaluate_losses_fm(model, dataset)?.total)
}

/// τ^pi(t_{k+1}) = κ L^ν(ε^pu)(t_{k+1}) - η L^ν(τ^pu)(t_{k+1}) on the dataset grid.
pub fn physics_informed_stress(model: &FmModel, k: usize, dataset: &RheoDataset) -> Result<f64> {
    if k + 1 >= dataset.len() {
        return Err(Error::Index(format!(
            "step {} is beyond the dataset's last sample {}",
            k + 1,
            dataset.len() - 1
        )));
    }
    let (tau, eps) = model.surrogates(&dataset.times()[..=k + 1])?;
    let p = model.parameters();
    let order = frac_order(p.nu)?;
    let c = l1_prefactor(order, dataset.dt())?;
    tau_pi(&p, c, &l1_coefficients(order, k), &tau, &eps, k)
}

/// G(t) = (κ/η) E_ν(-t^ν/η) with the model's effective parameters.
pub fn predict_relaxation_modulus(model: &FmModel, times: &[f64]) -> Result<Vec<f64>> {
    let p = model.parameters();
    let nu = MittagLefflerOrder::new(p.nu)?;
    times.iter().map(|&t| relaxation_modulus(p.kappa, p.eta, nu, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_loss_hand_value() {
        // residuals 0.3 and 0.2 against σ_τ = 0.3 and σ_ε = 0.1
        let ds = RheoDataset::new(vec![0.0, 1.0], vec![0.0, 0.6], vec![0.0, 0.2]).unwrap();
        assert!((ds.sigma_tau() - 0.3).abs() < 1e-16 && (ds.sigma_eps() - 0.1).abs() < 1e-16);
        let tau = vec![0.3, 0.6 + 0.3];
        let eps = vec![0.2, 0.2 + 0.2];
        let p = FmParameters { kappa: 1.0, eta: 1.0, nu: 0.5 };
        let (l, _) = losses_impl(&ds, &tau, &eps, &p, false).unwrap();
        assert!((l.data - 5.0).abs() < 1e-13, "{}", l.data);
    }

    #[test]
    fn single_step_hand_value() {
        let ds = RheoDataset::new(vec![0.0, 0.25], vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        let tau = vec![0.1, 0.7];
        let eps = vec![0.0, 0.4];
        let p = FmParameters { kappa: 2.0, eta: 0.5, nu: 0.3 };
        let (l, _) = losses_impl(&ds, &tau, &eps, &p, false).unwrap();
        let c = 1.0 / (0.25f64.powf(0.3) * crate::fraccalc::gamma_fn(1.7).unwrap());
        let tpi = 2.0 * c * 0.4 - 0.5 * c * (0.7 - 0.1);
        let want = (tpi - 0.7f64).powi(2) / (ds.sigma_tau() * ds.sigma_tau());
        assert!((l.consistency - want).abs() <= 1e-14 * want, "{} vs {want}", l.consistency);
    }
}
