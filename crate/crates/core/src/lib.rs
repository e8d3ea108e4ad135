//! Compact implicit inverse schemes for scalar advection on directed acyclic
//! networks, solved by space marching.
//!
//! The entry points are [`edge::solve`] for a single edge and
//! [`network::solve_network`] for a whole network. [`bench`] holds the
//! reference scenarios and convergence tooling used by the CLI.

pub mod bench;
pub mod cli;
pub mod edge;
pub mod error;
pub mod kernels;
pub mod netfile;
pub mod network;
pub mod nonlinear;
pub mod retardation;

pub use edge::{EdgeProblem, EdgeSolution};
pub use error::{Error, Result};
pub use kernels::{Scheme, SchemeConfig, SpaceGrid, TimeGrid};
pub use retardation::RetardationModel;
