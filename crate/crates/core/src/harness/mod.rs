//! Experiment orchestration: dyad sessions, grid sweeps and result files.

pub mod config;
pub mod dyad;
pub mod output;
pub mod seed;
pub mod sweep;

pub use config::{parse_grid, Condition, ExperimentConfig, Manifest, UtilityGrid, UtilitySpec};
pub use dyad::{run_dyad, Dyad, DyadSeries, SampleRecord};
pub use output::emit_outputs;
pub use sweep::{run_sweep, run_sweep_with, CellResult, CurveRow, Execution, HeatmapRow, SweepResult};
