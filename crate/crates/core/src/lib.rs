//! Simulation of adiabatic Aharonov-Bohm scattering of slow, unpolarised
//! neutrons on a current-carrying wire.
//!
//! The neutron spin follows the azimuthal field of the wire adiabatically;
//! eliminating it leaves two spatial channels `φ±` that see the potentials
//! `±κ f(r)` and a semi-fluxon gauge potential `α = ½`. The solver marches
//! either the decoupled (adiabatic) channels or the exact coupled pair on an
//! annular polar grid with sixth-order SBP-SAT differences and RK4.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod evolve;
pub mod field;
pub mod grid;
pub mod hamiltonian;
pub mod observables;
pub mod render;
pub mod sbp;
pub mod snapshot;
pub mod units;

pub use config::{parse_config, SimConfig};
pub use error::{Error, Result};
pub use evolve::{rk4_step, run, run_with, stable_dt, RunState, RunSummary, Simulation};
pub use field::{ModelTag, SpinorField};
pub use grid::Grid;
pub use hamiltonian::{
    apply_adiabatic_rhs, apply_exact_rhs, field_profile, gaussian_packet, init_gaussian, lab_frame,
    project_spin_basis, Hamiltonian, IncomingSpin,
};
pub use observables::{
    adiabaticity_distance, angular_profile, density, forward_centroid, forward_visibility, moments,
    momentum_expectation, spin_balance, spin_density, Band, ChannelDensities, Moments, SpinBalance,
};
pub use render::{render_heatmap, Colormap};
pub use sbp::{build_periodic, build_sbp, sat_dirichlet, PeriodicStencils, SbpOperators, Side};
pub use units::{derive_dimensionless, potential_height, DimensionlessParams, PhysicalParams};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotRecord};
