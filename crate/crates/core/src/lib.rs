//! Sectional fixed-pivot solver for the size-structured
//! growth-coagulation-fragmentation equation with a renewal boundary
//! condition, together with the diagnostics and scenario runners that check
//! its conservation identities, moment bounds and long-time behaviour.
//!
//! ```no_run
//! use gcf::prelude::*;
//!
//! let set = CoefficientSet::default()
//!     .with_coagulation(CoagulationKernel::constant(1.0).unwrap());
//! let grid = build_grid(50.0, 300, GridScheme::geometric(1.035).unwrap()).unwrap();
//! let disc = Discretization::new(&grid, &set).unwrap();
//! let initial = StateVector::from_fn(&grid, |u| (-u).exp()).unwrap();
//! let stepper = StepperConfig::new(2.0).with_output_spacing(0.1).unwrap();
//! let traj = run(&disc, initial, &stepper).unwrap();
//! println!("M0(2) = {}", traj.moments().last().unwrap().m0);
//! ```

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coefficients;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod integrator;
pub mod operators;

pub use error::{Error, Result};

/// The types needed for a typical run.
pub mod prelude {
    pub use crate::coefficients::{
        verify_assumptions, AssumptionReport, CoagulationKernel, CoefficientSet, DaughterDistribution,
        FragmentationRate, ProbeSpec, RateFunction,
    };
    pub use crate::diagnostics::{moment, weighted_difference_norm, MomentRecord};
    pub use crate::grid::{build_grid, GridScheme, SizeGrid};
    pub use crate::integrator::{run, Method, StepperConfig, Trajectory};
    pub use crate::operators::{truncate_coefficients, Discretization, Parallelism, StateVector, TruncationLevel};
    pub use crate::{Error, Result};
}
