//! Command-line front end for `pcrps-core`: file formats, the `pc`,
//! `grid-eval`, `compare` and `simulate` commands, and a small SVG writer.

pub mod commands;
pub mod error;
pub mod flatgrid;
pub mod series;
pub mod svg;

pub use commands::{run, Cli, Command};
pub use error::{CliError, CliResult};
pub use flatgrid::FlatGrid;
pub use series::Series;
