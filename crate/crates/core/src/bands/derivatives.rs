//! k-derivatives of a band frequency `ω_n(k)` (`λ_n` or `√λ_n`).
//!
//! First derivatives are computed both by fourth-order centered differences
//! and by the Hellmann–Feynman formula
//! `∂_{k_j} λ = Σ_m 2(k_j + m_j)|c_m|²` for a mode normalized in the mass
//! inner product. Second derivatives use the fourth-order five-point stencil
//! on the diagonal and the tensor product of first-derivative stencils off it.

use rayon::prelude::*;
use serde::Serialize;

use super::operator::{BlochOperator, OperatorKind};
use super::solve::{eigenvalues, relative_gap, BlochMode, DEGENERACY_TOL};
use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-3;

/// Stencil offsets and weights of the fourth-order first derivative
/// (divide by `h`).
const D1: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
/// Fourth-order second derivative (divide by `h²`).
const D2: [(f64, f64); 5] = [
    (-2.0, -1.0 / 12.0),
    (-1.0, 16.0 / 12.0),
    (0.0, -30.0 / 12.0),
    (1.0, 16.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

#[derive(Debug, Clone, Copy)]
pub struct FdOptions {
    pub h: f64,
    /// Allowed `|D(h) - D(h/2)|` relative to `max(1, |D|)` for gradients.
    pub gradient_tol: f64,
    /// Same for second derivatives.
    pub hessian_tol: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { h: DEFAULT_STEP, gradient_tol: 1e-7, hessian_tol: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gradient {
    /// Finite-difference gradient at step `h`.
    pub fd: Vec<f64>,
    pub hellmann_feynman: Vec<f64>,
    /// `max_j |fd_j(h) - fd_j(h/2)|`.
    pub richardson: f64,
}

impl Gradient {
    /// `max_j |fd_j - hf_j| / max(|hf|_∞, 1e-300)`.
    pub fn disagreement(&self) -> f64 {
        let scale = self.hellmann_feynman.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let diff = self
            .fd
            .iter()
            .zip(&self.hellmann_feynman)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hessian {
    /// Row-major `d × d`.
    pub matrix: Vec<Vec<f64>>,
    pub richardson: f64,
}

impl Hessian {
    pub fn asymmetry(&self) -> f64 {
        let d = self.matrix.len();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.matrix[i][j] - self.matrix[j][i]).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.matrix.len()).map(|i| self.matrix[i][i]).sum()
    }

    /// `‖H - (tr H / d) I‖_∞` (entrywise max).
    pub fn isotropy_defect(&self) -> f64 {
        let d = self.matrix.len();
        let alpha = self.trace() / d as f64;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { alpha } else { 0.0 };
                worst = worst.max((self.matrix[i][j] - target).abs());
            }
        }
        worst
    }
}

/// `ω_n(k)` with band `n` checked for simpleness at `k`.
pub fn band_frequency(op: &BlochOperator, k: &[f64], n: usize) -> Result<f64> {
    let count = (n + 1).min(op.size());
    let vals = eigenvalues(op, k, count)?;
    let gap = relative_gap(&vals, n).ok_or(Error::BandCount { requested: n, available: op.size() })?;
    if gap < DEGENERACY_TOL {
        return Err(Error::Simpleness { band: n, k: k.to_vec(), gap });
    }
    frequency(op.kind(), vals[n - 1], k)
}

pub fn frequency(kind: OperatorKind, lam: f64, k: &[f64]) -> Result<f64> {
    match kind {
        OperatorKind::Schrodinger => Ok(lam),
        OperatorKind::Wave if lam > 0.0 => Ok(lam.sqrt()),
        OperatorKind::Wave => Err(Error::NonPositiveFrequency { lam, k: k.to_vec() }),
    }
}

/// `∇_k ω` of a computed mode via Hellmann–Feynman.
pub fn hellmann_feynman(mode: &BlochMode, kind: OperatorKind) -> Result<Vec<f64>> {
    let d = mode.dim();
    let mut grad = vec![0.0; d];
    for (m, c) in mode.modes.iter().zip(&mode.coeffs) {
        let w = c.norm_sqr();
        for j in 0..d {
            grad[j] += 2.0 * (mode.k[j] + m[j] as f64) * w;
        }
    }
    if kind == OperatorKind::Wave {
        let omega = frequency(kind, mode.lam, &mode.k)?;
        grad.iter_mut().for_each(|g| *g /= 2.0 * omega);
    }
    Ok(grad)
}

fn shifted(k0: &[f64], steps: &[(usize, f64)]) -> Vec<f64> {
    let mut k = k0.to_vec();
    for &(j, dk) in steps {
        k[j] += dk;
    }
    k
}

fn fd_gradient(op: &BlochOperator, k0: &[f64], n0: usize, h: f64) -> Result<Vec<f64>> {
    let d = k0.len();
    let points: Vec<(usize, f64, f64)> = (0..d)
        .flat_map(|j| D1.iter().map(move |&(o, w)| (j, o, w)))
        .collect();
    let vals: Vec<f64> = points
        .par_iter()
        .map(|&(j, o, _)| band_frequency(op, &shifted(k0, &[(j, o * h)]), n0))
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; d];
    for (&(j, _, w), v) in points.iter().zip(&vals) {
        grad[j] += w * v / h;
    }
    Ok(grad)
}

/// Gradient of `ω_{n0}` at `k0` by finite differences and Hellmann–Feynman.
pub fn band_gradient(op: &BlochOperator, k0: &[f64], n0: usize, opts: FdOptions) -> Result<Gradient> {
    let mode = super::solve::solve_bands(op, k0, n0)?.pop().expect("n0 >= 1 bands");
    band_frequency(op, k0, n0)?;
    let hf = hellmann_feynman(&mode, op.kind())?;
    let fd = fd_gradient(op, k0, n0, opts.h)?;
    let fd_half = fd_gradient(op, k0, n0, opts.h / 2.0)?;
    let richardson = fd.iter().zip(&fd_half).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let scale = fd.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if richardson > opts.gradient_tol * scale {
        return Err(Error::Step(format!(
            "gradient changes by {richardson:e} between h={} and h/2",
            opts.h
        )));
    }
    Ok(Gradient { fd, hellmann_feynman: hf, richardson })
}

fn fd_hessian(op: &BlochOperator, k0: &[f64], n0: usize, h: f64) -> Result<Vec<Vec<f64>>> {
    let d = k0.len();
    // (i, j, stencil points with weights)
    let mut entries: Vec<(usize, usize, Vec<(Vec<f64>, f64)>)> = Vec::new();
    for i in 0..d {
        let pts = D2.iter().map(|&(o, w)| (shifted(k0, &[(i, o * h)]), w / (h * h))).collect();
        entries.push((i, i, pts));
        for j in i + 1..d {
            let mut pts = Vec::with_capacity(16);
            for &(oi, wi) in &D1 {
                for &(oj, wj) in &D1 {
                    pts.push((shifted(k0, &[(i, oi * h), (j, oj * h)]), wi * wj / (h * h)));
                }
            }
            entries.push((i, j, pts));
        }
    }
    let mut hess = vec![vec![0.0; d]; d];
    for (i, j, pts) in entries {
        let vals: Vec<f64> =
            pts.par_iter().map(|(k, _)| band_frequency(op, k, n0)).collect::<Result<_>>()?;
        let v: f64 = pts.iter().zip(&vals).map(|((_, w), f)| w * f).sum();
        hess[i][j] = v;
        hess[j][i] = v;
    }
    Ok(hess)
}

/// `D²ω_{n0}(k0)` by fourth-order finite differences with a step-halving
/// check.
pub fn band_hessian(op: &BlochOperator, k0: &[f64], n0: usize, opts: FdOptions) -> Result<Hessian> {
    let hess = fd_hessian(op, k0, n0, opts.h)?;
    let half = fd_hessian(op, k0, n0, opts.h / 2.0)?;
    let mut richardson = 0.0f64;
    let mut scale = 1.0f64;
    for (a, b) in hess.iter().zip(&half) {
        for (x, y) in a.iter().zip(b) {
            richardson = richardson.max((x - y).abs());
            scale = scale.max(x.abs());
        }
    }
    if richardson > opts.hessian_tol * scale {
        return Err(Error::Step(format!(
            "Hessian changes by {richardson:e} between h={} and h/2",
            opts.h
        )));
    }
    Ok(Hessian { matrix: hess, richardson })
}
