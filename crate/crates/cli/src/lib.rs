//! Experiment runner for `kgpml-core`: config files, orchestration of
//! single runs, convergence studies and sweeps, and CSV output.

pub mod config;
pub mod output;
pub mod runner;

pub use config::RunFile;
