//! File formats, end-to-end pipelines and the `unitrack` command-line tool
//! built on [`unitrack_core`].

pub mod cli;
mod error;
pub mod io;
pub mod manifest;
pub mod pipeline;

pub use error::{Error, Result};
