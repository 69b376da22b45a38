//! Coefficients of the effective envelope equation
//!
//! ```text
//! i ∂_T A + ½ ∇·(D²ω ∇A) + ν |A|² A = 0
//! ```
//!
//! for a carrier `p_{n0}(x, k0) e^{i(k0·x - ω0 t)}`.

use serde::Serialize;

use crate::bands::{
    band_gradient, band_hessian, frequency, solve_bands, BlochMode, BlochOperator, FdOptions,
    OperatorKind,
};
use crate::coefficients::PeriodicCoefficients;
use crate::error::{Error, Result};

/// Allowed deviation of `‖p‖` from one.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Largest `‖H - αI‖_∞ / |α|` accepted by the isotropic soliton construction.
pub const ISOTROPY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveNlsParams {
    pub omega0: f64,
    pub v_g: Vec<f64>,
    /// `D²ω_{n0}(k0)`, row-major `d × d`.
    pub hessian: Vec<Vec<f64>>,
    pub nu: f64,
    pub isotropy_defect: f64,
    /// Hellmann–Feynman gradient for comparison with `v_g`.
    pub v_g_hellmann_feynman: Vec<f64>,
    pub k0: Vec<f64>,
    pub band: usize,
}

impl EffectiveNlsParams {
    pub fn dim(&self) -> usize {
        self.v_g.len()
    }

    /// `tr H / d`.
    pub fn alpha(&self) -> f64 {
        (0..self.dim()).map(|i| self.hessian[i][i]).sum::<f64>() / self.dim() as f64
    }

    /// `α` after checking that `H ≈ αI`.
    pub fn isotropic_alpha(&self) -> Result<f64> {
        let alpha = self.alpha();
        if self.isotropy_defect > ISOTROPY_TOL * alpha.abs() {
            return Err(Error::Anisotropic { defect: self.isotropy_defect, alpha });
        }
        Ok(alpha)
    }

    pub fn is_focusing(&self) -> bool {
        self.nu > 0.0 && self.alpha() > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// `σ |u|² u` in the Gross–Pitaevskii equation.
    Gp { sigma: PeriodicCoefficients },
    /// `χ₃ u³` in the nonlinear wave equation.
    Nlw { chi3: PeriodicCoefficients },
}

/// Quadrature size that integrates `f |p|⁴` exactly for trigonometric `f`.
fn exact_grid(f: &PeriodicCoefficients, p: &BlochMode) -> usize {
    let d = p.dim();
    let spread = (0..d)
        .map(|j| {
            let lo = p.modes.iter().map(|m| m[j]).min().unwrap_or(0);
            let hi = p.modes.iter().map(|m| m[j]).max().unwrap_or(0);
            (hi - lo) as usize
        })
        .max()
        .unwrap_or(0);
    let q = 2 * spread + f.truncation() + 2;
    q + q % 2
}

/// `∫_P f |p|⁴ dx` by the trapezoidal rule on a grid fine enough to be exact.
fn quartic_overlap(f: &PeriodicCoefficients, p: &BlochMode) -> Result<f64> {
    if f.dim() != p.dim() {
        return Err(Error::Shape("coefficient and mode dimensions differ".into()));
    }
    f.check_real()?;
    let q = exact_grid(f, p);
    let pv = p.evaluate_cell(q);
    let fv = f.sample_complex(q);
    let w = (std::f64::consts::TAU / q as f64).powi(p.dim() as i32);
    Ok(pv.iter().zip(&fv).map(|(z, s)| s.re * z.norm_sqr().powi(2)).sum::<f64>() * w)
}

fn check_norm(p: &BlochMode) -> Result<()> {
    let dev = (p.l2_norm_sqr() - 1.0).abs();
    if dev > NORMALIZATION_TOL {
        return Err(Error::Normalization(dev));
    }
    Ok(())
}

/// `ν = -∫_P σ |p|⁴ dx` for `p` normalized in `L²(P)`.
pub fn nu_gp(sigma: &PeriodicCoefficients, p: &BlochMode) -> Result<f64> {
    check_norm(p)?;
    Ok(-quartic_overlap(sigma, p)?)
}

/// Cubic coefficient for `∂²_t u = χ₁Δu - χ₂u - χ₃u³`, with `p` normalized in
/// `L²_{χ₁}` (weight `1/χ₁`).
///
/// Constant folding: the coupling coefficient at the carrier is
/// `β = (2/ω0) ⟨χ₃ |p|² p, p⟩_{L²_{χ₁}}`, the prefactor `1/√2` of the
/// first-order system enters once through the folded unknowns and `3/√2`
/// counts the three positions of the conjugate factor, so the coefficient in
/// front of `|A|²A` is `-(3/√2)(1/√2)(1/2)β = -(3/(2ω0)) ∫ χ₃|p|⁴/χ₁`.
/// The sign is chosen so that, as in the GP case, `ν > 0` is focusing. For
/// `χ₁ ≡ 1` this equals `(3/(2ω0))·nu_gp(χ₃, p)`.
pub fn nu_nlw(
    chi1: &PeriodicCoefficients,
    chi3: &PeriodicCoefficients,
    p: &BlochMode,
    omega0: f64,
) -> Result<f64> {
    if !(omega0 > 0.0) {
        return Err(Error::NonPositiveFrequency { lam: omega0, k: p.k.clone() });
    }
    // ‖p‖²_{L²_{χ₁}} = ∫ |p|²/χ₁
    let q = exact_grid(chi1, p).max(64);
    let pv = p.evaluate_cell(q);
    let c1 = chi1.sample_complex(q);
    let w = (std::f64::consts::TAU / q as f64).powi(p.dim() as i32);
    let weighted = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
        pv.iter().zip(&c1).map(|(z, c)| f(z.norm_sqr(), c.re)).sum::<f64>() * w
    };
    let norm = weighted(&|a, c| a / c);
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization((norm - 1.0).abs()));
    }
    // χ₃/χ₁ is generally not a trigonometric polynomial; integrate on a grid
    // fine enough for spectral accuracy of the smooth integrand.
    let q = 4 * exact_grid(chi3, p).max(exact_grid(chi1, p)).max(32);
    let pv = p.evaluate_cell(q);
    let c1 = chi1.sample_complex(q);
    let c3 = chi3.sample_complex(q);
    let w = (std::f64::consts::TAU / q as f64).powi(p.dim() as i32);
    let overlap: f64 =
        pv.iter().zip(c1.iter().zip(&c3)).map(|(z, (a, b))| b.re * z.norm_sqr().powi(2) / a.re).sum::<f64>() * w;
    Ok(-3.0 / (2.0 * omega0) * overlap)
}

/// Carrier mode, band derivatives and cubic coefficient at `(k0, n0)`.
pub fn effective_params(
    op: &BlochOperator,
    k0: &[f64],
    n0: usize,
    nonlinearity: &Nonlinearity,
) -> Result<(EffectiveNlsParams, BlochMode)> {
    let mode = solve_bands(op, k0, n0)?.pop().expect("n0 >= 1");
    let opts = FdOptions::default();
    let grad = band_gradient(op, k0, n0, opts)?;
    let hess = band_hessian(op, k0, n0, opts)?;
    let omega0 = frequency(op.kind(), mode.lam, k0)?;
    let nu = match (nonlinearity, op.kind()) {
        (Nonlinearity::Gp { sigma }, OperatorKind::Schrodinger) => nu_gp(sigma, &mode)?,
        (Nonlinearity::Nlw { chi3 }, OperatorKind::Wave) => nu_nlw(&op.spec().chi1, chi3, &mode, omega0)?,
        _ => return Err(Error::Config("nonlinearity does not match the operator kind".into())),
    };
    let isotropy_defect = hess.isotropy_defect();
    log::info!(
        "effective parameters: omega0={omega0:.6} v_g={:?} alpha={:.6} nu={nu:.6} isotropy defect={isotropy_defect:.2e}",
        grad.fd,
        hess.trace() / k0.len() as f64
    );
    let params = EffectiveNlsParams {
        omega0,
        v_g: grad.fd,
        hessian: hess.matrix,
        nu,
        isotropy_defect,
        v_g_hellmann_feynman: grad.hellmann_feynman,
        k0: k0.to_vec(),
        band: n0,
    };
    Ok((params, mode))
}
