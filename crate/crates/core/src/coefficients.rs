//! Truncated Fourier representation of real `2π`-periodic coefficient fields.
//!
//! A field is stored spectrally as `f(x) = Σ_{|m_j| ≤ N} f̂_m e^{i m·x}` and
//! sampled on demand, so the band solver (which needs `f̂`) and the time
//! stepper (which needs point values) read the same data.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::lattice::{cube_modes, wrap_index, Lattice, MultiIndex, MAX_DIM};

/// Hermitian symmetry and imaginary-residue tolerance for real fields.
pub const REALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCoefficients {
    dim: usize,
    truncation: usize,
    /// Row-major over `{-N..=N}^d`.
    coeffs: Vec<Complex64>,
}

impl PeriodicCoefficients {
    pub fn new(dim: usize, truncation: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Lattice(format!("dimension {dim} not supported")));
        }
        let side = 2 * truncation + 1;
        if coeffs.len() != side.pow(dim as u32) {
            return Err(Error::Shape(format!(
                "expected {} coefficients for N={truncation}, d={dim}, got {}",
                side.pow(dim as u32),
                coeffs.len()
            )));
        }
        Ok(Self { dim, truncation, coeffs })
    }

    /// Builds a field from a sparse list of `(m, f̂_m)`.
    pub fn from_modes(dim: usize, modes: &[(Vec<i64>, Complex64)]) -> Result<Self> {
        let mut n = 0usize;
        for (m, _) in modes {
            if m.len() != dim {
                return Err(Error::Shape(format!("mode {m:?} does not have {dim} components")));
            }
            n = n.max(m.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0));
        }
        let mut out = Self::zeros(dim, n);
        for (m, c) in modes {
            let mut idx = [0i64; MAX_DIM];
            idx[..dim].copy_from_slice(m);
            let slot = out.slot(&idx).expect("mode inside truncation");
            out.coeffs[slot] += c;
        }
        Ok(out)
    }

    pub fn zeros(dim: usize, truncation: usize) -> Self {
        let side = 2 * truncation + 1;
        Self { dim, truncation, coeffs: vec![Complex64::default(); side.pow(dim as u32)] }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        let mut out = Self::zeros(dim, 0);
        out.coeffs[0] = Complex64::new(value, 0.0);
        out
    }

    /// `amplitude · ∏_j cos(x_j) + offset`.
    pub fn cosprod(dim: usize, amplitude: f64, offset: f64) -> Self {
        let mut out = Self::zeros(dim, 1);
        let weight = amplitude / 2f64.powi(dim as i32);
        for m in cube_modes(dim, 1) {
            if m[..dim].iter().all(|c| c.abs() == 1) {
                let slot = out.slot(&m).unwrap();
                out.coeffs[slot] = Complex64::new(weight, 0.0);
            }
        }
        let zero = out.slot(&[0; MAX_DIM]).unwrap();
        out.coeffs[zero] += offset;
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> Vec<MultiIndex> {
        cube_modes(self.dim, self.truncation)
    }

    fn slot(&self, m: &MultiIndex) -> Option<usize> {
        let n = self.truncation as i64;
        let side = 2 * n + 1;
        let mut flat = 0i64;
        for &c in m.iter().take(self.dim) {
            if c.abs() > n {
                return None;
            }
            flat = flat * side + (c + n);
        }
        if m[self.dim..].iter().any(|&c| c != 0) {
            return None;
        }
        Some(flat as usize)
    }

    /// `f̂_m`, zero outside the stored truncation.
    pub fn coeff(&self, m: &MultiIndex) -> Complex64 {
        self.slot(m).map_or(Complex64::default(), |s| self.coeffs[s])
    }

    /// Mean value `f̂_0`.
    pub fn mean(&self) -> f64 {
        self.coeff(&[0; MAX_DIM]).re
    }

    /// Modes with `|f̂_m| > tol`.
    pub fn support(&self, tol: f64) -> Vec<MultiIndex> {
        self.modes()
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| c.norm() > tol)
            .map(|(m, _)| m)
            .collect()
    }

    /// True when every non-zero mode is `m = 0`.
    pub fn is_constant(&self) -> bool {
        self.support(0.0).iter().all(|m| m.iter().all(|&c| c == 0))
    }

    /// Largest violation of `f̂_{-m} = conj(f̂_m)`.
    pub fn hermitian_defect(&self) -> (f64, MultiIndex) {
        let mut worst = (0.0, [0; MAX_DIM]);
        for m in self.modes() {
            let mut neg = m;
            for c in neg.iter_mut() {
                *c = -*c;
            }
            let d = (self.coeff(&m) - self.coeff(&neg).conj()).norm();
            if d > worst.0 {
                worst = (d, m);
            }
        }
        worst
    }

    pub fn check_real(&self) -> Result<()> {
        let (defect, mode) = self.hermitian_defect();
        if defect > REALITY_TOL {
            return Err(Error::Reality { defect, mode: mode[..self.dim].to_vec() });
        }
        Ok(())
    }

    /// Direct evaluation of the Fourier sum at one point.
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        self.modes()
            .iter()
            .zip(&self.coeffs)
            .map(|(m, c)| {
                let phase: f64 = (0..self.dim).map(|j| m[j] as f64 * x[j]).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Real samples on the `P^d` cell grid of `lattice`.
    pub fn sample(&self, lattice: &Lattice) -> Result<Vec<f64>> {
        if lattice.dim() != self.dim {
            return Err(Error::Shape(format!(
                "coefficient has d={}, lattice has d={}",
                self.dim,
                lattice.dim()
            )));
        }
        let p = lattice.cell_points();
        if self.truncation + 1 > p / 2 {
            return Err(Error::Alias { truncation: self.truncation, cell_points: p });
        }
        self.check_real()?;
        let values = self.sample_complex(p);
        let mut out = Vec::with_capacity(values.len());
        for z in values {
            if z.im.abs() > REALITY_TOL * (1.0 + z.re.abs()) {
                return Err(Error::Reality { defect: z.im.abs(), mode: vec![] });
            }
            out.push(z.re);
        }
        Ok(out)
    }

    /// Complex samples on a `q^d` grid with spacing `2π/q` via an inverse FFT.
    /// The caller guarantees `q > 2N` when exact values are wanted.
    pub fn sample_complex(&self, q: usize) -> Vec<Complex64> {
        let shape = vec![q; self.dim];
        let mut grid = vec![Complex64::default(); q.pow(self.dim as u32)];
        for (m, c) in self.modes().iter().zip(&self.coeffs) {
            let mut flat = 0;
            for j in 0..self.dim {
                flat = flat * q + wrap_index(m[j], q);
            }
            grid[flat] += c;
        }
        FftNd::new(&shape).backward(&mut grid);
        grid
    }

    /// Fourier coefficients of `f` sampled on a `q^d` grid, truncated to
    /// `|m_j| ≤ keep`. Also returns the largest discarded modulus.
    pub fn from_samples(
        dim: usize,
        q: usize,
        samples: &[f64],
        keep: usize,
    ) -> Result<(Self, f64)> {
        if samples.len() != q.pow(dim as u32) {
            return Err(Error::Shape("sample grid size mismatch".into()));
        }
        let mut spec: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftNd::new(&vec![q; dim]).forward(&mut spec);
        let scale = 1.0 / spec.len() as f64;
        let keep = keep.min((q - 1) / 2);
        let mut out = Self::zeros(dim, keep);
        let mut tail: f64 = 0.0;
        for (flat, z) in spec.iter().enumerate() {
            let idx = crate::lattice::unravel(flat, &vec![q; dim]);
            let mut m = [0i64; MAX_DIM];
            for j in 0..dim {
                m[j] = crate::lattice::signed_index(idx[j] as usize, q);
            }
            let c = z * scale;
            match out.slot(&m) {
                Some(s) => out.coeffs[s] = c,
                None => tail = tail.max(c.norm()),
            }
        }
        Ok((out, tail))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            truncation: self.truncation,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Pointwise minimum and maximum of the real part on a `q^d` grid.
    pub fn range_on_grid(&self, q: usize) -> (f64, f64) {
        self.sample_complex(q)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)))
    }
}
