//! Entangling power and operator entanglement of iterated random unitaries.
//!
//! The crate samples unitaries from the circular ensembles (CUE and COE),
//! follows product states under repeated application of a sampled map, and
//! measures subsystem linear entropy as a function of the iteration count.
//! Monte Carlo averages are compared against exact rational reference values
//! in [`closedform`].
//!
//! Layout:
//!
//! * [`ensembles`]: Haar unitaries, COE matrices, random real/complex states.
//! * [`entanglement`]: partial traces, linear entropy, operator entanglement.
//! * [`dynamics`]: spectral decomposition, powers, time series and averages.
//! * [`closedform`]: exact reference formulas and the form-factor model fit.
//! * [`montecarlo`]: seed-deterministic experiment runner and statistics.

pub mod closedform;
pub mod dynamics;
pub mod ensembles;
pub mod entanglement;
mod error;
pub mod montecarlo;

pub use error::{Error, Result};

/// Double-precision complex scalar used throughout the crate.
#[allow(non_camel_case_types)]
pub type c64 = nalgebra::Complex<f64>;

/// Library version, echoed into result metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
