//! Plane-wave Galerkin assembly of the Bloch operator
//! `L(k) = -χ₁ |∇ + ik|² + χ₂` on the periodicity cell.
//!
//! Dividing the eigenvalue problem by `χ₁` gives the Hermitian pencil
//!
//! ```text
//! A(k)_{m,m'} = |k + m|² δ_{m,m'} + (χ₂/χ₁)^_{m-m'},    B_{m,m'} = (1/χ₁)^_{m-m'},
//! ```
//!
//! with `B` positive definite whenever `χ₁ > 0`. For constant `χ₁ = c` the
//! mass matrix is `I/c` and the pencil collapses to a standard problem.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::PeriodicCoefficients;
use crate::error::{Error, Result};
use crate::lattice::{cube_modes, MultiIndex, MAX_DIM};

/// Relative size of the discarded spectral tail that still counts as resolved.
const QUOTIENT_TAIL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    /// Frequencies are the eigenvalues, `ω_n = λ_n`.
    Schrodinger,
    /// Frequencies are `ω_n = √λ_n`.
    Wave,
}

/// Invariant subspace of plane waves `{m : w·m ≡ residue (mod modulus)}`.
///
/// When every coefficient mode `s` satisfies `w·s ≡ 0`, the Galerkin matrices
/// are block diagonal over residues and bands may be labeled within one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sector {
    pub weights: Vec<i64>,
    pub modulus: i64,
    pub residue: i64,
}

impl Sector {
    pub fn contains(&self, m: &MultiIndex) -> bool {
        self.label(m) == self.residue.rem_euclid(self.modulus)
    }

    fn label(&self, m: &MultiIndex) -> i64 {
        let s: i64 = self.weights.iter().zip(m.iter()).map(|(w, c)| w * c).sum();
        s.rem_euclid(self.modulus)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.weights.len() != dim {
            return Err(Error::Sector(format!("expected {dim} weights, got {:?}", self.weights)));
        }
        if self.modulus < 2 {
            return Err(Error::Sector(format!("modulus must be >= 2, got {}", self.modulus)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochOperatorSpec {
    pub kind: OperatorKind,
    pub chi1: PeriodicCoefficients,
    pub chi2: PeriodicCoefficients,
    pub truncation: usize,
    pub sector: Option<Sector>,
}

impl BlochOperatorSpec {
    /// `-Δ + V` (Gross–Pitaevskii linear part).
    pub fn schrodinger(potential: PeriodicCoefficients, truncation: usize) -> Self {
        let dim = potential.dim();
        Self {
            kind: OperatorKind::Schrodinger,
            chi1: PeriodicCoefficients::constant(dim, 1.0),
            chi2: potential,
            truncation,
            sector: None,
        }
    }

    /// `-χ₁Δ + χ₂` with frequencies `√λ` (wave equation).
    pub fn wave(chi1: PeriodicCoefficients, chi2: PeriodicCoefficients, truncation: usize) -> Self {
        Self { kind: OperatorKind::Wave, chi1, chi2, truncation, sector: None }
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = Some(sector);
        self
    }

    pub fn dim(&self) -> usize {
        self.chi1.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Mass {
    /// `B = I / c` for constant `χ₁ = c`.
    Scalar(f64),
    General,
}

/// Operator with precomputed coefficient quotients, ready for assembly.
#[derive(Debug, Clone)]
pub struct BlochOperator {
    spec: BlochOperatorSpec,
    modes: Vec<MultiIndex>,
    quotient: PeriodicCoefficients,
    inv_chi1: PeriodicCoefficients,
    pub(crate) mass: Mass,
    /// `min χ₁` on the verification grid.
    pub ellipticity: f64,
}

impl BlochOperator {
    pub fn new(spec: BlochOperatorSpec) -> Result<Self> {
        let dim = spec.dim();
        if spec.chi2.dim() != dim {
            return Err(Error::Shape("χ₁ and χ₂ have different dimensions".into()));
        }
        spec.chi1.check_real()?;
        spec.chi2.check_real()?;
        let n = spec.truncation;
        let keep = 2 * n;
        let q = (8 * (n + spec.chi1.truncation() + spec.chi2.truncation()) + 32).next_power_of_two();
        let c1 = spec.chi1.sample_complex(q);
        let c2 = spec.chi2.sample_complex(q);
        let gamma = c1.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if !(gamma > 0.0) {
            return Err(Error::Ellipticity(format!("min χ₁ = {gamma} on a {q}-point grid")));
        }
        if spec.kind == OperatorKind::Wave {
            let min2 = c2.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            if !(min2 > 0.0) {
                return Err(Error::Ellipticity(format!("min χ₂ = {min2} on a {q}-point grid")));
            }
        }

        let (mass, quotient, inv_chi1) = if spec.chi1.is_constant() {
            let c = spec.chi1.mean();
            let quotient = spec.chi2.scaled(1.0 / c);
            let inv = PeriodicCoefficients::constant(dim, 1.0 / c);
            (Mass::Scalar(c), quotient, inv)
        } else {
            let ratio: Vec<f64> = c2.iter().zip(&c1).map(|(a, b)| a.re / b.re).collect();
            let inv: Vec<f64> = c1.iter().map(|b| 1.0 / b.re).collect();
            let (quotient, tq) = resolved(dim, q, &ratio)?;
            let (inv_chi1, ti) = resolved(dim, q, &inv)?;
            log::debug!("coefficient quotient tails: χ₂/χ₁ {tq:e}, 1/χ₁ {ti:e}");
            (Mass::General, truncate(&quotient, keep), truncate(&inv_chi1, keep))
        };

        let mut modes = cube_modes(dim, n);
        if let Some(sector) = &spec.sector {
            sector.validate(dim)?;
            for s in quotient.support(1e-14).iter().chain(inv_chi1.support(1e-14).iter()) {
                if sector.label(s) != 0 {
                    return Err(Error::Sector(format!(
                        "coefficient mode {:?} couples different residues",
                        &s[..dim]
                    )));
                }
            }
            modes.retain(|m| sector.contains(m));
            if modes.is_empty() {
                return Err(Error::Sector("sector contains no plane waves".into()));
            }
        }
        Ok(Self { spec, modes, quotient, inv_chi1, mass, ellipticity: gamma })
    }

    pub fn spec(&self) -> &BlochOperatorSpec {
        &self.spec
    }

    pub fn kind(&self) -> OperatorKind {
        self.spec.kind
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn modes(&self) -> &[MultiIndex] {
        &self.modes
    }

    /// Galerkin dimension.
    pub fn size(&self) -> usize {
        self.modes.len()
    }

    /// Fourier coefficients of `χ₂/χ₁` used by the assembly.
    pub fn quotient(&self) -> &PeriodicCoefficients {
        &self.quotient
    }

    pub fn inverse_chi1(&self) -> &PeriodicCoefficients {
        &self.inv_chi1
    }

    /// `(A(k), B)`; `k` may lie outside the zone (the plane-wave basis is
    /// not shifted, so `A(k + e_j)` is a permuted, truncated copy of `A(k)`).
    pub fn assemble(&self, k: &[f64]) -> Result<(Mat<Complex64>, Mat<Complex64>)> {
        let a = self.stiffness(k)?;
        let n = self.size();
        let b = Mat::from_fn(n, n, |i, j| self.inv_chi1.coeff(&diff(&self.modes[i], &self.modes[j])));
        Ok((a, b))
    }

    pub(crate) fn stiffness(&self, k: &[f64]) -> Result<Mat<Complex64>> {
        let dim = self.dim();
        if k.len() != dim {
            return Err(Error::Shape(format!("wavevector {k:?} is not {dim}-dimensional")));
        }
        let n = self.size();
        Ok(Mat::from_fn(n, n, |i, j| {
            let mut z = self.quotient.coeff(&diff(&self.modes[i], &self.modes[j]));
            if i == j {
                z += kinetic(k, &self.modes[i]);
            }
            z
        }))
    }
}

/// `|k + m|²`.
pub(crate) fn kinetic(k: &[f64], m: &MultiIndex) -> f64 {
    k.iter().zip(m.iter()).map(|(kj, &mj)| (kj + mj as f64).powi(2)).sum()
}

fn diff(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    let mut d = [0i64; MAX_DIM];
    for j in 0..MAX_DIM {
        d[j] = a[j] - b[j];
    }
    d
}

fn resolved(dim: usize, q: usize, samples: &[f64]) -> Result<(PeriodicCoefficients, f64)> {
    let keep = q / 4;
    let (coeffs, tail) = PeriodicCoefficients::from_samples(dim, q, samples, keep)?;
    let scale = coeffs.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    if tail > QUOTIENT_TAIL_TOL * scale.max(1.0) {
        return Err(Error::Truncation { limit: keep, tail });
    }
    Ok((coeffs, tail))
}

fn truncate(c: &PeriodicCoefficients, keep: usize) -> PeriodicCoefficients {
    let dim = c.dim();
    let modes: Vec<(Vec<i64>, Complex64)> = c
        .modes()
        .into_iter()
        .filter(|m| m[..dim].iter().all(|x| x.unsigned_abs() as usize <= keep))
        .map(|m| (m[..dim].to_vec(), c.coeff(&m)))
        .filter(|(_, z)| z.norm() > 0.0)
        .collect();
    if modes.is_empty() {
        return PeriodicCoefficients::zeros(dim, 0);
    }
    PeriodicCoefficients::from_modes(dim, &modes).expect("dimensions agree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_operator_is_diagonal() {
        let spec = BlochOperatorSpec::schrodinger(PeriodicCoefficients::constant(1, 0.7), 3);
        let op = BlochOperator::new(spec).unwrap();
        let (a, b) = op.assemble(&[0.3]).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let m = op.modes()[i][0] as f64;
                let expect = if i == j { (0.3 + m).powi(2) + 0.7 } else { 0.0 };
                assert!((a[(i, j)].re - expect).abs() < 1e-14);
                assert!(a[(i, j)].im.abs() < 1e-14);
                let bexp = if i == j { 1.0 } else { 0.0 };
                assert!((b[(i, j)].re - bexp).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cosprod_offdiagonals_are_quarter() {
        let spec = BlochOperatorSpec::schrodinger(PeriodicCoefficients::cosprod(2, 1.0, 0.0), 2);
        let op = BlochOperator::new(spec).unwrap();
        let (a, _) = op.assemble(&[0.4, 0.0]).unwrap();
        for (i, mi) in op.modes().iter().enumerate() {
            for (j, mj) in op.modes().iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = diff(mi, mj);
                let expect = if d[0].abs() == 1 && d[1].abs() == 1 { 0.25 } else { 0.0 };
                assert!((a[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sector_must_be_invariant() {
        let v = PeriodicCoefficients::cosprod(2, 1.0, 0.0);
        let parity = Sector { weights: vec![1, 1], modulus: 2, residue: 1 };
        let op = BlochOperator::new(BlochOperatorSpec::schrodinger(v.clone(), 4).with_sector(parity))
            .unwrap();
        assert!(op.modes().iter().all(|m| (m[0] + m[1]).rem_euclid(2) == 1));
        let bad = Sector { weights: vec![1, 0], modulus: 2, residue: 0 };
        assert!(matches!(
            BlochOperator::new(BlochOperatorSpec::schrodinger(v, 4).with_sector(bad)),
            Err(Error::Sector(_))
        ));
    }

    #[test]
    fn ellipticity_is_enforced() {
        let chi1 = PeriodicCoefficients::cosprod(1, 1.0, 0.5);
        let spec = BlochOperatorSpec::wave(chi1, PeriodicCoefficients::constant(1, 1.0), 3);
        assert!(matches!(BlochOperator::new(spec), Err(Error::Ellipticity(_))));
    }

    #[test]
    fn general_mass_matrix_is_hermitian_positive() {
        let chi1 = PeriodicCoefficients::cosprod(1, 1.0, 2.5);
        let chi2 = PeriodicCoefficients::cosprod(1, 0.5, 2.0);
        let op = BlochOperator::new(BlochOperatorSpec::wave(chi1, chi2, 4)).unwrap();
        let (a, b) = op.assemble(&[0.2]).unwrap();
        for i in 0..op.size() {
            for j in 0..op.size() {
                assert!((a[(i, j)] - a[(j, i)].conj()).norm() < 1e-14);
                assert!((b[(i, j)] - b[(j, i)].conj()).norm() < 1e-14);
            }
        }
        assert!(b.llt(faer::Side::Lower).is_ok());
    }
}
