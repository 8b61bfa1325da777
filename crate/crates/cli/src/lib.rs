//! Batch runner behind the `fepi` binary.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{Command, Grid, Options, RunConfig, OUT_DIR_ENV};
pub use experiments::run;
pub use output::{emit_plot_data, Aggregator, PlotTable, RunReport};
