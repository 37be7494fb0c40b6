//! File formats, the model endpoint client, resumable runs and the
//! command-line front end built on `disjax-core`.

pub mod cli;
pub mod client;
pub mod config;
pub mod error;
pub mod eval;
pub mod formats;
pub mod ingest;
pub mod session;
pub mod transcript;

pub use error::{Error, ExitStatus, Result};
