//! Inverse solver for concentration-dependent sub-diffusion: learns the field
//! c(t, x, y), the coefficient D̃(c) and the fractional order α.

mod dataset;
mod loss;
mod model;
mod train;

pub use dataset::{AdDataset, DT_REL_TOL};
pub(crate) use dataset::uniform_step;
pub use loss::{ad_losses, AdLosses, CoefficientField, SurrogateFields};
pub use model::{
    consistency_loss_ad, data_loss_ad, evaluate_losses, g_term, loss_gradient, physics_informed_concentration,
    predict_concentrations, predict_diffusion_curve, total_loss_ad, AdArchitecture, AdModel, AxisScale,
};
pub use train::{concentration_grid, recover, train_ad, train_ad_observed, AdRecovery, AdTrainConfig};
