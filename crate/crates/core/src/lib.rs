//! Phase-information fidelity of a two-port Mach-Zehnder interferometer.
//!
//! The crate measures how much an interferometer tells an experimenter about
//! an unknown phase shift. Instead of a single-peak width, it uses the Shannon
//! mutual information between the phase and the photon-counting outcomes,
//! evaluated on a uniform periodic phase grid.
//!
//! * [`optics`] builds the scattering matrix and exact outcome probabilities
//!   for Fock, N00N and arbitrary two-mode photon-number superpositions.
//! * [`bayes`] turns likelihoods into phase posteriors, counts their peaks and
//!   simulates sequential measurement records.
//! * [`fidelity`] computes the mutual information, its repeated-shot variant
//!   and the classical error-propagation sensitivity.
//! * [`optimizer`] searches input-state coefficients for maximal fidelity.

pub mod bayes;
mod error;
pub mod fidelity;
pub mod grid;
pub mod nelder_mead;
pub mod optics;
pub mod optimizer;

pub use error::{Error, Result};
pub use grid::PhaseGrid;
pub use optics::{InterferometerGeometry, LikelihoodTable, Outcome, ScatteringMatrix, StateCoefficients};

/// Default number of phase grid points used for reported numbers.
pub const DEFAULT_GRID_SIZE: usize = 8192;

/// Largest photon number the log-factorial weights are exercised for.
pub const MAX_PHOTON_NUMBER: u32 = 40;
