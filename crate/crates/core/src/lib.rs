//! Sewing and knitting engines for approximate flows on metric spaces.

pub mod action;
pub mod certify;
pub mod cli;
pub mod error;
pub mod knitting;
pub mod metric;
pub mod models;
pub mod path;
pub mod sewing;
pub mod subdivision;

pub use error::{Error, Result};
