//! File formats, reports and the `needlets` command line on top of
//! [`needlets_core`].
//!
//! * [`binary`]: the `NDLT1` little-endian record for coefficients and fields.
//! * [`csv`]: `index,value` text.
//! * [`image`]: portable graymap/pixmap rendering of equirectangular fields.
//! * [`io`]: atomic writes, spectrum tables, t-design directories.
//! * [`config`], [`cli`], [`commands`]: run configuration and subcommands.
//! * [`report`]: JSON and text report documents.

pub mod binary;
pub mod cli;
pub mod commands;
pub mod config;
pub mod csv;
mod error;
pub mod image;
pub mod io;
pub mod report;

pub use error::{Error, Result};
