//! Kinetic limits of weakly disordered lattice fermions.
//!
//! Building blocks, bottom up:
//!
//! * [`lattice`]: the discrete torus, fields, transforms, pair potentials.
//! * [`disorder`]: reproducible Gaussian disorder samples.
//! * [`micro`]: split-step ensembles of the one-particle random Schrödinger
//!   dynamics with a self-consistent exchange term.
//! * [`kinetic`]: the energy-shell linear Boltzmann flow.
//! * [`stationary`]: fixed points of the renormalized shell average.
//! * [`graphs`]: pairing enumeration and classification.
//! * [`experiment`]: configuration files, runs and CSV/JSON outputs.

pub mod disorder;
pub mod error;
pub mod experiment;
pub mod graphs;
pub mod kinetic;
pub mod lattice;
pub mod micro;
pub mod reduce;
pub mod stationary;

pub use error::{Error, Result};
pub use lattice::{make_grid, GridSpec, PairPotential, ScalarField};
