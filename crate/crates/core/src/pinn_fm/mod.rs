//! Inverse solver for the fractional Maxwell law: learns stress and strain
//! surrogates together with κ, η and ν, then predicts the relaxation modulus.

mod dataset;
mod model;
mod train;

pub use dataset::RheoDataset;
pub use model::{
    consistency_loss_fm, data_loss_fm, evaluate_losses_fm, fm_losses, loss_gradient_fm, physics_informed_stress,
    predict_relaxation_modulus, total_loss_fm, FmArchitecture, FmLosses, FmModel, FmParameters,
};
pub use train::{train_fm, train_fm_observed, FmTrainConfig};
