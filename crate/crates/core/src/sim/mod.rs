//! Forward models that generate the synthetic benchmarks.

mod diffusion;
mod noise;
mod rheo;

pub use diffusion::{
    discrete_g, explicit_step_scale, explicit_update, g_operator, gaussian_bump, max_stable_dt, solve_frac_diffusion,
    stability_limit, DiffusionSpec, FieldSeries, Grid2D,
};
pub use noise::add_noise;
pub use rheo::{gen_fm_response, gen_fm_series, gen_relaxation_test, ramp_hold_strain, RheoProvenance, RheoSeries};
