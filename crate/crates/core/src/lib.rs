//! Passive-scalar transport and advection-diffusion on the 2-torus driven by
//! alternating sawtooth shear flows.
//!
//! The crate is split along the lines of the simulation pipeline:
//!
//! * [`spectral`]: torus grids, Fourier coefficients under the `(1/2π)∫` convention,
//!   Sobolev norms, projections and grid Hölder estimators.
//! * [`velocity`]: sawtooth shears, parameter schedules and time profiles.
//! * [`evolution`]: exact spectral shears, the heat semigroup, Strang splitting and
//!   the Lagrangian backtracking oracle.
//! * [`analysis`]: dissipation functionals, growth envelopes, balanced-growth and
//!   forwards-backwards matrix checks.
//! * [`harness`]: configuration, resolution budgeting, named experiments and output.

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod spectral;
pub mod velocity;

pub use error::{Error, Result};
