//! Bloch eigenvalue problem, band tables, band derivatives and spectral
//! checks.

mod checks;
mod derivatives;
mod operator;
mod solve;
mod table;

pub use checks::{
    check_asymptotics, check_nonresonance, full_band_index, AsymptoticsReport, NonresonanceReport,
    RESONANCE_TOL,
};
pub use derivatives::{
    band_frequency, band_gradient, band_hessian, frequency, hellmann_feynman, FdOptions, Gradient,
    Hessian, DEFAULT_STEP,
};
pub use operator::{BlochOperator, BlochOperatorSpec, OperatorKind, Sector};
pub use solve::{
    check_simple, eigenvalues, mode_index, relative_gap, solve_bands, BlochMode, NormConvention,
    DEGENERACY_TOL,
};
pub use table::{band_structure, k_grid, k_path, BandTable, KPath};
