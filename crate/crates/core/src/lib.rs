//! Densities of wait-first and jump-first Lévy walk scaling limits.

mod cheb;
pub mod curve;
pub mod error;
pub mod io;
pub mod jump_first;
pub mod kernel;
pub mod meijer;
pub mod montecarlo;
pub mod params;
pub mod quadrature;
pub mod special;
pub mod stable;
pub mod wait_first;

pub use error::{Error, Result};
pub use params::{EvalPoint, ModelParams};
