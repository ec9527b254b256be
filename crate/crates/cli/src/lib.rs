//! Scenario runner for one-bit misspecified bounds: configuration files,
//! sweeps and CSV output.

pub mod error;
pub mod presets;
pub mod run;
pub mod scenario;
pub mod table;

pub use error::CliError;
pub use presets::{list_presets, preset, preset_source};
pub use run::{complexity_table, render, run_scenario, run_scenario_file, write_files, CsvFile, RunOptions};
pub use scenario::{Axis, ModelConfig, NoiseConfig, NoiseKindConfig, Output, Scenario, SnrReference, SweepConfig, Values};
pub use table::Table;
