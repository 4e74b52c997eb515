//! Experiment orchestration: configuration, simulation runs, the τ-sweep
//! driver, verification suites and CSV emission.

pub mod config;
pub mod csv;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{
    InitialConfig, InitialPreset, MeshConfig, OutputConfig, SimConfig, TimeConfig,
    FIGURE_PULSE_AMPLITUDE,
};
pub use run::{project_initial, run_simulation, RunOutput};
pub use sweep::{sweep_tau, SweepConfig, SweepRow};
