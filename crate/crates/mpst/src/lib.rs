//! File formats and command-line front-end for `mpst-core`.

pub mod cert;
pub mod cli;
pub mod config;
