//! File formats, experiment configs and the `archpred` command line on top
//! of [`archpred_core`].

pub mod checkpoint;
pub mod config;
mod error;
pub mod experiments;
pub mod io;
pub mod output;

pub use error::{Error, Result};
