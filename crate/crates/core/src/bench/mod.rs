//! Benchmark cases, sweeps, verification and export.

pub mod cases;
pub mod config;
pub mod export;
pub mod sweep;
pub mod verify;

pub use cases::{case_geiger2d, case_geiger3d};
pub use config::{CaseConfig, CaseName, ExportFormat};
pub use sweep::{prepare, run_case, run_sweep, solve, CaseRun, SweepParam, SweepRow, SweepTable};
pub use verify::{interpolate_flux, pressure_error, verify_solution, ConservationReport};
