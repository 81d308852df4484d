//! Independent ground truth for the closed forms.
//!
//! - [`diagrams`] and [`quadrature`]: the connected vacuum diagrams of the
//!   expansion, integrated numerically over imaginary time.
//! - [`spectrum`]: the exact free energy `−T ln Σ e^(−E_n/T)` from the
//!   diagonalized Hamiltonian.

pub mod diagrams;
pub mod quadrature;
pub mod spectrum;

pub use diagrams::{builtin_diagrams, diagrams_of_order, DiagramSpec, Edge};
pub use quadrature::{quad_correction, quad_diagram, QuadResult, QuadSpec, Route};
pub use spectrum::{build_hamiltonian, exact_free_energy, exact_free_energy_with, ExactFreeEnergy, ExactOptions, Spectrum};
