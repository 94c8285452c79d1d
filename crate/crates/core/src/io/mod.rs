//! File formats: Fama-French daily returns, instance JSON, benchmark tables.

pub mod ff;
pub mod grid;
pub mod instance;
pub mod results;
pub mod synthetic;

pub use ff::{parse_ff_daily, parse_ff_str, ColumnRef, FfData, FfOptions, MissingPolicy, RowRange};
pub use grid::mu0_grid;
pub use instance::{Instance, InstanceFile, ScenarioSource};
pub use results::{emit_results, BenchRecord, Format, Tables, Timed};
pub use synthetic::factor_scenarios;
