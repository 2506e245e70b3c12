//! Experiment drivers for `nullwave-core`: TOML experiment files, CSV tables with
//! JSON sidecars, and the `nullwave` command line.

pub mod cli;
pub mod experiments;
pub mod report;
pub mod spec;
