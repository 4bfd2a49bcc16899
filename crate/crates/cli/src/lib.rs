//! Command-line front end: argument parsing, CSV/JSON rendering, run
//! manifests, and the acceptance suite behind `verify`.

pub mod acceptance;
pub mod args;
pub mod commands;
pub mod manifest;
pub mod report;
