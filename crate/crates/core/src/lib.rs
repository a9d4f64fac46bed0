//! Front-tracking lab for the ZND piston problem with a piecewise equation of state.

pub mod eos;
pub mod error;
pub mod hugoniot;
pub mod output;
pub mod riemann_transform;
pub mod simulator;
pub mod suite;
pub mod verification;

pub use eos::{Branch, EosParams, ThermoPoint};
pub use error::{Error, Result};
pub use hugoniot::{
    admissible_window, boundary_maps, g_maps, lax_check, rh_residuals, solve_downstream, solve_downstream_closed_form,
    solve_from_piston_speed, AdmissibleWindow, BoundaryMaps, ShockBoundary, ShockLocusPoint, UpstreamState,
};
pub use riemann_transform::{choose_scaling, DiagonalState, Perturbation, ReferenceState, ScalingParams};
pub use simulator::{init_scenario, reconstruct_physical, run, z_field, ScenarioConfig, Simulation, TimeSeries};
pub use output::{config_hash, parse_scenario, parse_scenario_str};
pub use verification::{CheckResult, Thresholds, VerificationReport};
