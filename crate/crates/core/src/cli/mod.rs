//! Command-line front end: problem files, artifacts and the subcommand pipeline.

pub mod artifacts;
pub mod pipeline;
pub mod problem;
