//! Bloch-wave envelope toolkit for periodic Gross–Pitaevskii equations.

pub mod bands;
pub mod bloch;
pub mod coefficients;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod fft;
pub mod field;
pub mod lattice;
pub mod ode;
pub mod plot;
pub mod study;
pub mod townes;
pub mod wavepacket;

pub use error::{Error, Result};
