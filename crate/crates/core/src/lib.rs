pub mod bessel;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod montecarlo;
pub mod payoff;
pub mod solver_y;

pub use error::{Error, Result};
