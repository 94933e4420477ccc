//! Numerical Lorentzian Aubry–Mather laboratory on torus spacetimes.
//!
//! The cover of `Tⁿ` is `ℝⁿ`; every metric is `ℤⁿ`-periodic and time oriented.

pub mod calibrate;
pub mod error;
pub mod exec;
pub mod flow;
pub mod graphcheck;
pub mod hedlund;
pub mod measures;
pub mod reach;
pub mod spacetime;
pub mod stable;

pub use error::{Error, Result};
pub use exec::Exec;
pub use spacetime::{CausalClass, CausalPath, MetricField, Matrix, Vector};
