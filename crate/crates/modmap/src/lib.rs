//! File formats, wall clock and command-line front-end for `modmap-core`.

pub mod cli;
pub mod clock;
pub mod dimacs;
pub mod json;
pub mod report;

pub use cli::run;
