//! Experiment drivers behind the `skelid` command-line tool.
//!
//! Each driver returns its rows in memory and has a matching `write`
//! function producing CSV files that start with a schema comment line.

pub mod accuracy;
pub mod bench;
pub mod config;
pub mod factor;
pub mod gen;
pub mod growth;
pub mod prepare;

pub use config::ExperimentConfig;
pub use prepare::Prepared;
