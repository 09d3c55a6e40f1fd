//! Experiment harness: file formats, bundled data and the CLI command
//! bodies.

pub mod commands;
pub mod images;
pub mod io;
