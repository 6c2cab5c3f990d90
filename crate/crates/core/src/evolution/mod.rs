//! Exact shear and heat operators, their Strang composition, and the Lagrangian oracle.

mod lagrangian;
mod run;
mod shear;
pub mod snapshot;

pub use lagrangian::{lagrangian_backtrack, lagrangian_h1, MapChain, PointShear, Stage};
pub use run::{
    run_advection_diffusion, run_transport, CrossCheck, FreeDecay, Mark, MarkKind, Phase,
    RunOptions, TimeRecord, Trajectory, TransportState,
};
pub use shear::{apply_heat, apply_shear, heat_dissipation, heat_multiplier_step, shear_phase_step};
