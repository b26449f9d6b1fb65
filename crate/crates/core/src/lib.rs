pub mod app;
pub mod error;
pub mod fraccalc;
pub mod io;
pub mod metrics;
pub mod nn;
pub mod optim;
pub mod pinn_ad;
pub mod pinn_fm;
pub mod sim;
mod stats;

pub use error::{Error, Result};
