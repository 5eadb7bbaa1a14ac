//! Command-line front end: instance generation, solving, exact reference
//! solutions, mission evaluation, benchmarking and rendering.

pub mod bench;
pub mod commands;
pub mod io;
pub mod render;

pub use commands::{run, Cli};
