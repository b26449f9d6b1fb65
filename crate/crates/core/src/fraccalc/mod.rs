//! Special functions and the L1 Caputo operator.

mod gamma;
mod l1;
mod mittag_leffler;
mod quad;

pub(crate) use l1::{history_adjoint, history_alpha_derivative, CompensatedSum};

pub use gamma::{digamma, gamma_fn, ln_gamma, GAMMA_MAX_ARG};
pub use l1::{
    caputo_l1, caputo_l1_increments, history_term, l1_coefficient_alpha_derivatives, l1_coefficients, l1_prefactor,
    l1_prefactor_log_alpha_derivative, FracOrder, L1Stencil,
};
pub use mittag_leffler::{mittag_leffler, relaxation_modulus, MittagLefflerOrder, ML_MIN_ARG};
