use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("truncation N={truncation} aliases on a {cell_points}-point cell grid (need N <= P/2 - 1)")]
    Alias { truncation: usize, cell_points: usize },

    #[error("coefficient is not real-valued: Hermitian symmetry violated by {defect:e} at mode {mode:?}")]
    Reality { defect: f64, mode: Vec<i64> },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("ellipticity violated: {0}")]
    Ellipticity(String),

    #[error("coefficient quotient needs Fourier modes beyond |m| <= {limit} (tail {tail:e})")]
    Truncation { limit: usize, tail: f64 },

    #[error("invalid sector: {0}")]
    Sector(String),

    #[error("requested {requested} bands but the Galerkin space has dimension {available}")]
    BandCount { requested: usize, available: usize },

    #[error("eigenvalue {band} at k={k:?} is not simple (relative gap {gap:e})")]
    Simpleness { band: usize, k: Vec<f64>, gap: f64 },

    #[error("finite-difference step does not converge: {0}")]
    Step(String),

    #[error("wave-equation eigenvalue {lam} is not positive at k={k:?}")]
    NonPositiveFrequency { lam: f64, k: Vec<f64> },

    #[error("nonresonance violated: |{j}*omega0 - omega_{n}(j k0)| = {margin:e}")]
    Resonance { n: i64, j: i64, margin: f64 },

    #[error("mode normalization off by {0:e}")]
    Normalization(f64),

    #[error("Hessian is not isotropic: defect {defect:e} vs mean diagonal {alpha}")]
    Anisotropic { defect: f64, alpha: f64 },

    #[error("shooting failed to bracket R(0) in [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("ODE integration failed: {0}")]
    Stiffness(String),

    #[error("radial profile queried at r={r} beyond r_max={r_max} where R={tail:e}")]
    ProfileRange { r: f64, r_max: f64, tail: f64 },

    #[error("non-finite value at step {step} (t={time})")]
    NonFinite { step: usize, time: f64 },

    #[error("log-log fit needs positive data: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("eigensolver failure: {0}")]
    Eigen(String),
}

impl Error {
    /// Errors caused by bad input rather than by a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Lattice(_)
                | Error::Alias { .. }
                | Error::Reality { .. }
                | Error::Shape(_)
                | Error::Ellipticity(_)
                | Error::Sector(_)
                | Error::BandCount { .. }
                | Error::Config(_)
                | Error::Domain(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
