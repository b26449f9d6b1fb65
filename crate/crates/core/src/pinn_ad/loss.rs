use serde::{Deserialize, Serialize};

use super::dataset::AdDataset;
use crate::error::{Error, Result};
use crate::fraccalc::{
    history_adjoint, history_alpha_derivative, history_term, l1_coefficient_alpha_derivatives, l1_coefficients, l1_prefactor_log_alpha_derivative, CompensatedSum,
    FracOrder,
};
use crate::metrics::scaled_mse;
use crate::sim::{explicit_step_scale, explicit_update, g_operator};

/// A concentration surrogate and its spatial derivatives at every dataset
/// sample, stored location-major like [`AdDataset::values`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurrogateFields {
    pub value: Vec<f64>,
    pub cx: Vec<f64>,
    pub cy: Vec<f64>,
    pub cxx: Vec<f64>,
    pub cyy: Vec<f64>,
}

impl SurrogateFields {
    pub fn zeros(n: usize) -> Self {
        SurrogateFields {
            value: vec![0.0; n],
            cx: vec![0.0; n],
            cy: vec![0.0; n],
            cxx: vec![0.0; n],
            cyy: vec![0.0; n],
        }
    }

    fn len(&self) -> usize {
        self.value.len()
    }
}

/// D̃ and dD̃/dc evaluated at the surrogate concentration of every sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientField {
    pub d: Vec<f64>,
    pub d_c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdLosses {
    pub data: f64,
    pub consistency: f64,
    pub total: f64,
}

impl AdLosses {
    fn new(data: f64, consistency: f64) -> Self {
        AdLosses {
            data,
            consistency,
            total: data + consistency,
        }
    }
}

/// Adjoints of the losses' total with respect to every field entry and α.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FieldAdjoints {
    pub fields: SurrogateFields,
    pub coef: CoefficientField,
    pub alpha: f64,
}

/// Data and consistency losses for given surrogate fields.
///
/// The consistency term compares, at every location and every step k < K,
/// `Γ(2-α) dt^α g(t_k) + h(t_k)` against the surrogate at t_{k+1}.
pub fn ad_losses(dataset: &AdDataset, fields: &SurrogateFields, coef: &CoefficientField, alpha: FracOrder) -> Result<AdLosses> {
    losses_impl(dataset, fields, coef, alpha, false).map(|(l, _)| l)
}

pub(crate) fn ad_losses_with_adjoints(
    dataset: &AdDataset,
    fields: &SurrogateFields,
    coef: &CoefficientField,
    alpha: FracOrder,
) -> Result<(AdLosses, FieldAdjoints)> {
    losses_impl(dataset, fields, coef, alpha, true).map(|(l, a)| (l, a.expect("adjoints requested")))
}

fn losses_impl(
    dataset: &AdDataset,
    fields: &SurrogateFields,
    coef: &CoefficientField,
    alpha: FracOrder,
    want_adjoints: bool,
) -> Result<(AdLosses, Option<FieldAdjoints>)> {
    let n = dataset.len();
    let lens = [
        fields.len(),
        fields.cx.len(),
        fields.cy.len(),
        fields.cxx.len(),
        fields.cyy.len(),
        coef.d.len(),
        coef.d_c.len(),
    ];
    if lens.iter().any(|&l| l != n) {
        return Err(Error::Shape(format!("surrogate fields have lengths {lens:?}, dataset has {n} samples")));
    }
    let sigma2 = dataset.sigma_c() * dataset.sigma_c();
    let nt = dataset.n_times();
    let np = dataset.n_locations();
    let u = &fields.value;
    let mut adj = want_adjoints.then(|| FieldAdjoints {
        fields: SurrogateFields::zeros(n),
        coef: CoefficientField {
            d: vec![0.0; n],
            d_c: vec![0.0; n],
        },
        alpha: 0.0,
    });

    let data = scaled_mse(u, dataset.values(), dataset.sigma_c())?;
    if let Some(a) = adj.as_mut() {
        let data_norm = n as f64 * sigma2;
        for ((av, &ui), &ci) in a.fields.value.iter_mut().zip(u).zip(dataset.values()) {
            *av += 2.0 * (ui - ci) / data_norm;
        }
    }

    let steps = nt - 1;
    let mut consistency = CompensatedSum::default();
    if steps > 0 {
        let scale = explicit_step_scale(alpha, dataset.dt())?;
        let coeffs = l1_coefficients(alpha, steps - 1);
        let dcoeffs = if want_adjoints {
            l1_coefficient_alpha_derivatives(alpha, steps - 1)
        } else {
            Vec::new()
        };
        let cons_norm = (np * steps) as f64 * sigma2;
        let mut w_g_sum = 0.0;
        let mut w_b_sum = 0.0;
        for p in 0..np {
            let base = p * nt;
            let hist = &u[base..base + nt];
            for k in 0..steps {
                let i = base + k;
                let g = g_operator(coef.d[i], coef.d_c[i], fields.cx[i], fields.cy[i], fields.cxx[i], fields.cyy[i]);
                let h = history_term(&hist[..=k], &coeffs)?;
                let r = explicit_update(scale, g, h) - hist[k + 1];
                consistency.add(r * r / cons_norm);
                let Some(a) = adj.as_mut() else { continue };

                let w = 2.0 * r / cons_norm;
                a.fields.value[i + 1] -= w;
                let wg = w * scale;
                let (cx, cy) = (fields.cx[i], fields.cy[i]);
                a.coef.d[i] += wg * (fields.cxx[i] + fields.cyy[i]);
                a.coef.d_c[i] += wg * (cx * cx + cy * cy);
                a.fields.cx[i] += wg * 2.0 * coef.d_c[i] * cx;
                a.fields.cy[i] += wg * 2.0 * coef.d_c[i] * cy;
                a.fields.cxx[i] += wg * coef.d[i];
                a.fields.cyy[i] += wg * coef.d[i];
                w_g_sum += w * g;

                history_adjoint(&coeffs, k, w, &mut a.fields.value[base..base + nt]);
                w_b_sum += w * history_alpha_derivative(&dcoeffs, hist, k);
            }
        }
        if let Some(a) = adj.as_mut() {
            // Γ(2-α) dt^α is the reciprocal of the L1 prefactor
            let dscale = -scale * l1_prefactor_log_alpha_derivative(alpha, dataset.dt())?;
            a.alpha = w_g_sum * dscale + w_b_sum;
        }
    }
    Ok((AdLosses::new(data, consistency.value()), adj))
}
