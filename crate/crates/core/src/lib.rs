//! Free energy of the quartic anharmonic oscillator
//! `H = p²/2m + ½mω²x² + λx⁴` from a variational perturbation expansion.
//!
//! The trial frequency Ω is fixed once by the Gaussian (Feynman–Jensen)
//! variational principle and then shared by every higher-order correction:
//!
//! ```text
//! F ≈ F0 + F⁽²⁾ + F⁽³⁾ + F⁽⁴⁾
//! ```
//!
//! Every closed-form correction can be checked against two independent
//! engines in [`oracles`]: direct quadrature of the connected vacuum diagrams
//! and the exact free energy from diagonalizing `H` in an oscillator basis.
//!
//! Module map:
//!
//! - [`model`]: parameters, the dimensionless `(z, T)` rescaling, the thermal
//!   propagator and the harmonic reference free energy.
//! - [`variational`]: the gap equation and the variational free energy F0.
//! - [`series`]: the closed-form corrections and their partial sums.
//! - [`oracles`]: diagram quadrature and exact spectrum.
//! - [`report`]: table and figure reproduction, sweeps and output formats.

pub mod error;
pub mod exec;
pub mod hyperbolic;
pub mod model;
pub mod oracles;
pub mod report;
pub mod series;
pub mod variational;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{harmonic_free_energy, rescale, unrescale, ModelParams, Propagator, RescaledParams};
pub use series::{series_eval, FreeEnergySeries, Order};
pub use variational::{f0, solve_gap, Branch, VariationalSolution};
