use std::f64::consts::TAU;
use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{BlochOperator, Mass, OperatorKind};
use crate::error::{Error, Result};
use crate::lattice::{reduce_to_zone, MultiIndex, MAX_DIM};

/// Relative gap below which neighbouring eigenvalues count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormConvention {
    /// `∫_P |p|² dx = 1`.
    L2,
    /// `∫_P |p|² / χ₁ dx = 1`.
    L2Chi1,
}

/// Bloch eigenpair `(λ_n(k), p_n(·, k))` with
/// `p(x) = (2π)^{-d/2} Σ_m c_m e^{i m·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochMode {
    pub k: Vec<f64>,
    /// 1-based band index within the operator's Galerkin space.
    pub band: usize,
    pub lam: f64,
    pub modes: Arc<Vec<MultiIndex>>,
    pub coeffs: Vec<Complex64>,
    pub norm: NormConvention,
}

impl BlochMode {
    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// Temporal frequency for the given operator kind.
    pub fn frequency(&self, kind: OperatorKind) -> f64 {
        match kind {
            OperatorKind::Schrodinger => self.lam,
            OperatorKind::Wave => self.lam.sqrt(),
        }
    }

    /// `‖p‖²_{L²(P)} = Σ |c_m|²`.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn coefficient(&self, m: &MultiIndex) -> Complex64 {
        self.modes.iter().position(|x| x == m).map_or(Complex64::default(), |i| self.coeffs[i])
    }

    /// `p(x)` by direct summation.
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        let d = self.dim();
        let norm = TAU.powf(-(d as f64) / 2.0);
        self.modes
            .iter()
            .zip(&self.coeffs)
            .map(|(m, c)| {
                let phase: f64 = (0..d).map(|j| m[j] as f64 * x[j]).sum();
                c * Complex64::from_polar(norm, phase)
            })
            .sum()
    }

    /// `p` on the `q^d` cell grid `x = (2π/q)·i`, summed separably so that
    /// no aliasing occurs for any `q`.
    pub fn evaluate_cell(&self, q: usize) -> Vec<Complex64> {
        let d = self.dim();
        let dx = TAU / q as f64;
        let norm = TAU.powf(-(d as f64) / 2.0);
        match d {
            1 => (0..q)
                .map(|i| {
                    let x = i as f64 * dx;
                    self.modes
                        .iter()
                        .zip(&self.coeffs)
                        .map(|(m, c)| c * Complex64::from_polar(norm, m[0] as f64 * x))
                        .sum()
                })
                .collect(),
            2 => {
                // partial sums over m₂ for each m₁ and x₂
                let m1s: Vec<i64> = {
                    let mut v: Vec<i64> = self.modes.iter().map(|m| m[0]).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                };
                let mut partial = vec![Complex64::default(); m1s.len() * q];
                for (m, c) in self.modes.iter().zip(&self.coeffs) {
                    let row = m1s.binary_search(&m[0]).unwrap();
                    for i2 in 0..q {
                        partial[row * q + i2] +=
                            c * Complex64::from_polar(1.0, m[1] as f64 * i2 as f64 * dx);
                    }
                }
                let mut out = vec![Complex64::default(); q * q];
                for (row, &m1) in m1s.iter().enumerate() {
                    for i1 in 0..q {
                        let e = Complex64::from_polar(norm, m1 as f64 * i1 as f64 * dx);
                        for i2 in 0..q {
                            out[i1 * q + i2] += e * partial[row * q + i2];
                        }
                    }
                }
                out
            }
            _ => unreachable!("dimension checked by the lattice"),
        }
    }

    /// Same mode multiplied by `e^{iθ}`.
    pub fn rephased(&self, theta: f64) -> BlochMode {
        let e = Complex64::from_polar(1.0, theta);
        BlochMode { coeffs: self.coeffs.iter().map(|c| c * e).collect(), ..self.clone() }
    }
}

/// Lowest `n_max` eigenvalues at `k`, ascending.
pub fn eigenvalues(op: &BlochOperator, k: &[f64], n_max: usize) -> Result<Vec<f64>> {
    check_count(op, n_max)?;
    let (k, _) = reduce_to_zone(k);
    let k = k.as_slice();
    let vals = match op.mass {
        Mass::Scalar(c) => {
            let a = op.stiffness(k)?;
            hermitian_eigenvalues(&a)?.into_iter().map(|v| v * c).collect::<Vec<_>>()
        }
        Mass::General => {
            let (a, b) = op.assemble(k)?;
            let (reduced, _) = reduce_pencil(&a, &b)?;
            hermitian_eigenvalues(&reduced)?
        }
    };
    Ok(vals.into_iter().take(n_max).collect())
}

/// Lowest `n_max` eigenpairs at `k`, ascending, orthonormal in the mass inner
/// product, each phased so its largest-modulus coefficient is real positive.
///
/// `k` is reduced into the zone before assembly; for `k = k_red + s` the
/// returned coefficients are relabeled `m ↦ m - s`, which is the
/// quasiperiodic continuation `p(x, k) = e^{-i s·x} p(x, k_red)`.
pub fn solve_bands(op: &BlochOperator, k: &[f64], n_max: usize) -> Result<Vec<BlochMode>> {
    check_count(op, n_max)?;
    let n = op.size();
    let k_orig = k;
    let (k_red, shift) = reduce_to_zone(k);
    let k = k_red.as_slice();
    let (vals, vecs) = match op.mass {
        Mass::Scalar(c) => {
            let a = op.stiffness(k)?;
            let eig = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
            let vals: Vec<f64> = (0..n).map(|i| eig.S()[i].re * c).collect();
            let scale = c.sqrt();
            let vecs = Mat::from_fn(n, n, |i, j| eig.U()[(i, j)] * scale);
            (vals, vecs)
        }
        Mass::General => {
            let (a, b) = op.assemble(k)?;
            let (reduced, chol) = reduce_pencil(&a, &b)?;
            let eig = reduced
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigen(format!("{e:?}")))?;
            let vals: Vec<f64> = (0..n).map(|i| eig.S()[i].re).collect();
            // c = L^{-H} y
            let mut vecs = eig.U().to_owned();
            chol.adjoint().solve_upper_triangular_in_place(vecs.as_mut());
            (vals, vecs)
        }
    };
    let modes = Arc::new(
        op.modes()
            .iter()
            .map(|m| {
                let mut out = *m;
                for (j, s) in shift.iter().enumerate() {
                    out[j] -= s;
                }
                out
            })
            .collect::<Vec<_>>(),
    );
    let norm = match op.mass {
        Mass::Scalar(c) if c == 1.0 => NormConvention::L2,
        _ => NormConvention::L2Chi1,
    };
    Ok((0..n_max)
        .map(|b| {
            let mut coeffs: Vec<Complex64> = (0..n).map(|i| vecs[(i, b)]).collect();
            fix_phase(&mut coeffs);
            BlochMode { k: k_orig.to_vec(), band: b + 1, lam: vals[b], modes: modes.clone(), coeffs, norm }
        })
        .collect())
}

/// Relative gap of band `n` (1-based) to its neighbours; `None` when `n` is
/// out of range.
pub fn relative_gap(vals: &[f64], n: usize) -> Option<f64> {
    let i = n.checked_sub(1)?;
    let v = *vals.get(i)?;
    let scale = v.abs().max(1e-300);
    let mut gap = f64::INFINITY;
    if i > 0 {
        gap = gap.min((v - vals[i - 1]).abs() / scale);
    }
    if let Some(next) = vals.get(i + 1) {
        gap = gap.min((next - v).abs() / scale);
    }
    Some(gap)
}

/// Errors unless band `n` is separated from both neighbours by more than
/// [`DEGENERACY_TOL`] (relative) at `k`.
pub fn check_simple(op: &BlochOperator, k: &[f64], n: usize) -> Result<f64> {
    let count = (n + 1).min(op.size());
    let vals = eigenvalues(op, k, count)?;
    let gap = relative_gap(&vals, n)
        .ok_or(Error::BandCount { requested: n, available: op.size() })?;
    if gap < DEGENERACY_TOL {
        return Err(Error::Simpleness { band: n, k: k.to_vec(), gap });
    }
    Ok(gap)
}

fn check_count(op: &BlochOperator, n_max: usize) -> Result<()> {
    if n_max == 0 || n_max > op.size() {
        return Err(Error::BandCount { requested: n_max, available: op.size() });
    }
    Ok(())
}

fn hermitian_eigenvalues(a: &Mat<Complex64>) -> Result<Vec<f64>> {
    let vals = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(vals)
}

/// `L^{-1} A L^{-H}` with `B = L L^H`; returns the reduced matrix and `L`.
fn reduce_pencil(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Result<(Mat<Complex64>, Mat<Complex64>)> {
    let llt = b
        .llt(Side::Lower)
        .map_err(|e| Error::Ellipticity(format!("mass matrix not positive definite: {e:?}")))?;
    let l = llt.L().to_owned();
    let mut x = a.clone();
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut y = x.adjoint().to_owned();
    l.solve_lower_triangular_in_place(y.as_mut());
    // symmetrize away roundoff
    let n = y.nrows();
    let c = Mat::from_fn(n, n, |i, j| (y[(i, j)] + y[(j, i)].conj()) * 0.5);
    Ok((c, l))
}

fn fix_phase(coeffs: &mut [Complex64]) {
    let mut best = 0;
    for (i, c) in coeffs.iter().enumerate() {
        // strict comparison with a relative margin keeps the choice stable
        // under roundoff when two coefficients have equal modulus
        if c.norm() > coeffs[best].norm() * (1.0 + 1e-9) {
            best = i;
        }
    }
    let pivot = coeffs[best];
    if pivot.norm() == 0.0 {
        return;
    }
    let rot = pivot.conj() / pivot.norm();
    coeffs.iter_mut().for_each(|c| *c *= rot);
}

/// Plane-wave index padded to [`MAX_DIM`].
pub fn mode_index(m: &[i64]) -> MultiIndex {
    let mut out = [0i64; MAX_DIM];
    out[..m.len()].copy_from_slice(m);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::operator::BlochOperatorSpec;
    use crate::coefficients::PeriodicCoefficients;

    #[test]
    fn constant_potential_ground_state() {
        let op = BlochOperator::new(BlochOperatorSpec::schrodinger(
            PeriodicCoefficients::constant(1, 1.0),
            4,
        ))
        .unwrap();
        let modes = solve_bands(&op, &[0.0], 1).unwrap();
        assert!((modes[0].lam - 1.0).abs() < 1e-14);
        let p = modes[0].evaluate(&[0.7]);
        assert!((p - Complex64::new(TAU.powf(-0.5), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigen_residual_and_mass_orthonormality() {
        let chi1 = PeriodicCoefficients::cosprod(1, 0.8, 2.0);
        let chi2 = PeriodicCoefficients::cosprod(1, -0.6, 1.5);
        let op = BlochOperator::new(BlochOperatorSpec::wave(chi1, chi2, 8)).unwrap();
        let k = [0.31];
        let modes = solve_bands(&op, &k, 6).unwrap();
        let (a, b) = op.assemble(&k).unwrap();
        let n = op.size();
        for mode in &modes {
            let c = &mode.coeffs;
            let mut res = 0.0;
            for i in 0..n {
                let mut z = Complex64::default();
                for j in 0..n {
                    z += (a[(i, j)] - b[(i, j)] * mode.lam) * c[j];
                }
                res += z.norm_sqr();
            }
            let cn: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(res.sqrt() <= 1e-8 * (1.0 + mode.lam.abs()) * cn);
        }
        for (i, p) in modes.iter().enumerate() {
            for (j, q) in modes.iter().enumerate() {
                let mut g = Complex64::default();
                for r in 0..n {
                    for s in 0..n {
                        g += p.coeffs[r].conj() * b[(r, s)] * q.coeffs[s];
                    }
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - expect).norm() < 1e-9, "gram[{i},{j}] = {g}");
            }
        }
    }

    #[test]
    fn phase_convention() {
        let op = BlochOperator::new(BlochOperatorSpec::schrodinger(
            PeriodicCoefficients::cosprod(2, 1.0, 0.0),
            4,
        ))
        .unwrap();
        for mode in solve_bands(&op, &[0.13, -0.21], 5).unwrap() {
            let big = mode.coeffs.iter().cloned().fold(Complex64::default(), |a, b| {
                if b.norm() > a.norm() * (1.0 + 1e-9) { b } else { a }
            });
            assert!(big.im.abs() < 1e-14 && big.re > 0.0);
        }
    }

    #[test]
    fn quasiperiodic_relabeling() {
        let op = BlochOperator::new(BlochOperatorSpec::schrodinger(
            PeriodicCoefficients::cosprod(1, 0.7, 0.0),
            6,
        ))
        .unwrap();
        let a = solve_bands(&op, &[0.2], 3).unwrap();
        let b = solve_bands(&op, &[1.2], 3).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.lam, pb.lam);
            for x in [0.0, 0.4, 2.9] {
                let expect = pa.evaluate(&[x]) * Complex64::from_polar(1.0, -x);
                assert!((pb.evaluate(&[x]) - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_too_many_bands() {
        let op = BlochOperator::new(BlochOperatorSpec::schrodinger(
            PeriodicCoefficients::constant(1, 0.0),
            2,
        ))
        .unwrap();
        assert!(matches!(solve_bands(&op, &[0.0], 6), Err(Error::BandCount { .. })));
    }

    #[test]
    fn degeneracy_is_flagged() {
        // free 1D bands at k = 0: λ₂ = λ₃ = 1
        let op = BlochOperator::new(BlochOperatorSpec::schrodinger(
            PeriodicCoefficients::constant(1, 0.0),
            3,
        ))
        .unwrap();
        assert!(matches!(check_simple(&op, &[0.0], 2), Err(Error::Simpleness { .. })));
        assert!(check_simple(&op, &[0.1], 2).is_ok());
    }
}
