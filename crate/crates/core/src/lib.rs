//! Finite element solver for the one-dimensional stress wave equation of
//! strain-limiting elastic bodies.
//!
//! The governing equation is written with the Cauchy stress as the primary
//! unknown,
//!
//! ```text
//! rho * d2/dt2 [ f(sigma) ] - d2 sigma / dx2 = g(x, t),
//! f(sigma) = sigma / (1 + (b |sigma|)^a)^(1/a),
//! ```
//!
//! so the nonlinearity lives entirely in the inertial term. Space is
//! discretised with continuous Lagrange elements of degree 1 to 3, time with
//! the HHT-alpha scheme, and each stage equation is solved by Newton's method
//! on the nodal stress acceleration.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command-line driver live in the `strainwave` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod banded;
pub mod calibration;
pub mod constitutive;
pub mod error;
pub mod fe_space;
pub mod integrator;
pub mod postprocess;
pub mod quadrature;
pub mod verification;

pub use assembly::{AccelerationConstraint, AssembledSystem, SystemAssembler};
pub use banded::{BandedLu, BandedMatrix};
pub use calibration::{fit_material, sse_objective, synthetic_dataset, FitResult, FitSettings, StressStrainDataset};
pub use constitutive::{check_hyperbolicity, verify_hyperbolicity, HyperbolicityReport, MaterialParams};
pub use error::Error;
pub use fe_space::{DegreePolicy, FeSpace, LagrangeBasis, ShapeValues};
pub use integrator::{
    boundary_acceleration, newmark_update, run_simulation, BoundaryDrive, HhtParams,
    InitialAcceleration, InitialCondition, NewtonReport, NewtonSettings, RunReport, Simulation,
    SimulationConfig, SimulationOutput, Source, SystemState,
};
pub use postprocess::{reconstruct, sample_solution, FieldSamples, SnapshotRecord};
pub use quadrature::{gauss_rule, QuadratureRule};
pub use verification::{
    convergence_study, l2_error, mms_fields, mms_forcing, ConvergenceRow, ConvergenceTable,
    MmsCase, MmsFields, MmsSettings, StudyKind,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;
