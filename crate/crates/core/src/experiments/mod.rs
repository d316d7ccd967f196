//! Declarative Monte-Carlo sweeps, log-log rate fits and the command line.
//!
//! A sweep is described by an [`ExperimentConfig`] (INI file or named
//! preset), executed by [`run_sweep`] into [`ResultRow`]s, and summarized
//! by [`fit_rate`] and [`effective_sample_size_check`].

pub mod cli;
pub mod config;
pub mod distributions;
pub mod fit;
pub mod runner;

pub use config::{parse_count_grid, parse_real_grid, preset, EstimatorParams, ExperimentConfig, Metric, Task, Variant, PRESETS};
pub use distributions::{DataLaw, Design, Sample};
pub use fit::{effective_sample_size_check, fit_power_law, fit_rate, EssPoint, EssReport, RateFit};
pub use runner::{mean_and_stderr, read_csv, run_sweep, write_csv, ResultRow, CSV_SCHEMA_VERSION};
