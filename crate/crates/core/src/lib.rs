//! Discrete finite-strain elastoplasticity on Eulerian configurations.
//!
//! States are pairs `(y, y_p)` of piecewise-affine maps on a triangulated
//! reference domain: the total deformation and the plastic deformation. The
//! elastic strain is `∇y (∇y_p)⁻¹`, the plastic strain `∇y_p` is kept in
//! `SL(2)`, and dissipation is measured by a distance on `SL(2)`.
//!
//! Modules:
//! - [`algebra`]: small dense matrices, spectral tools, exp/log.
//! - [`energy`]: stored energy densities, loads and the total energy.
//! - [`dissipation`]: rate potential, one-step distance, path estimates.
//! - [`geometry`]: polygons, Hausdorff distance, Jones condition, injectivity.
//! - [`mesh`]: P1 meshes, fields, states and the isochoric projection.
//! - [`solver`]: incremental minimization and quasistatic runs.
//! - [`verify`]: certificates for stability and energy balance.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod dissipation;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod sampling;
pub mod solver;
pub mod verify;

pub use algebra::Mat;
pub use dissipation::DissipationModel;
pub use energy::{EnergyModel, Loading};
pub use error::{Error, Result};
pub use geometry::Polygon;
pub use mesh::{Field, Mesh, State};

pub use solver::{Models, SolverConfig, TimeGrid, Trajectory};
