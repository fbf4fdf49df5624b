//! Numerical laboratory for the viscous contact wave of the one-dimensional
//! full compressible Navier-Stokes inflow problem.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the scenario runner
//! uses.

// `!(x > 0)` is how NaN gets rejected alongside nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod heat_reference;
pub mod ns_solver;
pub mod params;
pub mod profile;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid1D = grid::Grid<f64>;
pub type Field = grid::Field<f64>;
pub type PhysParams = params::PhysParams<f64>;
pub type RawParams = params::RawParams<f64>;
pub type ProfileParams = params::ProfileParams<f64>;
pub type KappaCoupling = params::KappaCoupling<f64>;
pub type ProfileState = profile::ProfileState<f64>;
pub type ProfileResidual = profile::ProfileResidual<f64>;
pub type KernelQuadSpec = heat_reference::KernelQuadSpec<f64>;
pub type FluidState = ns_solver::FluidState<f64>;
pub type Perturbation = ns_solver::Perturbation<f64>;
pub type PerturbSpec = ns_solver::PerturbSpec<f64>;
pub type DecayRecord = diagnostics::DecayRecord<f64>;
pub type DecayFit = diagnostics::DecayFit<f64>;
pub type EnergySample = diagnostics::EnergySample<f64>;
pub type EnergyRecord = diagnostics::EnergyRecord<f64>;
pub type KappaRow = diagnostics::KappaRow<f64>;
pub type Theta0Report = diagnostics::Theta0Report<f64>;
