//! File formats, report rendering and the command-line front end for
//! `moebius-energy`.

pub mod app;
pub mod error;
pub mod files;
pub mod report;

pub use error::{CliError, Result, EXIT_INPUT, EXIT_NUMERICAL};
pub use files::{read_curve, read_map, write_curve, CurveFile, MapFile, PrimitiveFile};
