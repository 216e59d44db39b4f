//! Experiment configs, reports and the `benford` command-line tool, on top
//! of [`benford_core`].

pub mod cli;
pub mod config;
pub mod report;
pub mod reproduce;
pub mod run;
