//! Configuration, the ε-convergence harness and report output.

mod config;
mod convergence;
mod report;

pub use config::*;
pub use convergence::*;
pub use report::*;
