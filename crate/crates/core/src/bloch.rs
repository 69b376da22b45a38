//! Discrete Bloch transform on a cell-commensurate box.
//!
//! With the box spectrum normalized as `u(x) = Σ_ξ û(ξ) e^{iξ·x}` and the box
//! wavenumbers `ξ = k + m` split into a reduced `k` on the `M`-point grid of
//! the Brillouin zone and an integer `m`, the transform is
//!
//! ```text
//! ũ(x, k) = M^d Σ_m û(k + m) e^{i m·x},      u(x) = M^{-d} Σ_k ũ(x, k) e^{i k·x},
//! ```
//!
//! i.e. the discrete counterpart of `∫_B dk` is `M^{-d} Σ_k`. Coordinates are
//! box-local (measured from the first grid point), which is a multiple of `2π`
//! away from the physical origin.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::field::ComplexField;
use crate::lattice::{signed_index, strides, unravel, wrap_index, Lattice, MultiIndex, MAX_DIM};

#[derive(Debug, Clone, PartialEq)]
pub struct BlochField {
    lattice: Lattice,
    /// `[k][x]`: reduced-wavenumber blocks of cell samples, both row-major.
    values: Vec<Complex64>,
}

impl BlochField {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn k_shape(&self) -> Vec<usize> {
        self.lattice.num_cells().to_vec()
    }

    /// Position of reduced index `r` (already inside the zone) in storage.
    fn k_slot(&self, r: &MultiIndex) -> usize {
        let cells = self.lattice.num_cells();
        (0..self.lattice.dim()).fold(0, |acc, j| {
            let lo = *self.lattice.reduced_indices(j).start();
            acc * cells[j] + (r[j] - lo) as usize
        })
    }

    /// Reduced wavenumber `k = r / M` of a storage slot.
    pub fn wavenumber(&self, k_flat: usize) -> Vec<f64> {
        let idx = unravel(k_flat, &self.k_shape());
        (0..self.lattice.dim())
            .map(|j| {
                let lo = *self.lattice.reduced_indices(j).start();
                (idx[j] + lo) as f64 / self.lattice.num_cells()[j] as f64
            })
            .collect()
    }

    /// `ũ(x_q, k)` for any integer index vector `r` (wavenumber `r/M`), using
    /// quasiperiodicity `ũ(x, k + s) = e^{-i s·x} ũ(x, k)` outside the zone.
    pub fn value(&self, q_flat: usize, r: &MultiIndex) -> Complex64 {
        let dim = self.lattice.dim();
        let p = self.lattice.cell_points();
        let q = unravel(q_flat, &vec![p; dim]);
        let mut red = [0i64; MAX_DIM];
        let mut phase = 0.0;
        for j in 0..dim {
            let m = self.lattice.num_cells()[j];
            let rr = signed_index(r[j].rem_euclid(m as i64) as usize, m);
            let s = (r[j] - rr) / m as i64;
            red[j] = rr;
            phase -= s as f64 * q[j] as f64 * self.lattice.dx();
        }
        let slot = self.k_slot(&red);
        self.values[slot * self.lattice.cell_len() + q_flat] * Complex64::from_polar(1.0, phase)
    }

    /// The cell profile `x ↦ ũ(x, r/M)`.
    pub fn profile(&self, r: &MultiIndex) -> Vec<Complex64> {
        (0..self.lattice.cell_len()).map(|q| self.value(q, r)).collect()
    }

    /// Multiplies every profile by a cell-periodic function sampled on the
    /// cell grid.
    pub fn multiply_periodic(&self, cell_samples: &[f64]) -> Result<BlochField> {
        let cl = self.lattice.cell_len();
        if cell_samples.len() != cl {
            return Err(Error::Shape("cell sample count mismatch".into()));
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| z * cell_samples[i % cl])
            .collect();
        Ok(BlochField { lattice: self.lattice.clone(), values })
    }

    /// Discrete convolution over the zone,
    /// `(f * g)(x, k) = M^{-d} Σ_l f(x, k - l) g(x, l)`.
    pub fn convolve(&self, other: &BlochField) -> Result<BlochField> {
        if self.lattice != other.lattice {
            return Err(Error::Shape("convolution of fields on different lattices".into()));
        }
        let dim = self.lattice.dim();
        let cl = self.lattice.cell_len();
        let nk = self.lattice.num_k();
        let k_shape = self.k_shape();
        let lows: Vec<i64> = (0..dim).map(|j| *self.lattice.reduced_indices(j).start()).collect();
        let r_of = |flat: usize| {
            let mut r = unravel(flat, &k_shape);
            for j in 0..dim {
                r[j] += lows[j];
            }
            r
        };
        let scale = 1.0 / nk as f64;
        let mut values = vec![Complex64::default(); nk * cl];
        for kf in 0..nk {
            let rk = r_of(kf);
            for lf in 0..nk {
                let rl = r_of(lf);
                let mut diff = [0i64; MAX_DIM];
                for j in 0..dim {
                    diff[j] = rk[j] - rl[j];
                }
                for q in 0..cl {
                    values[kf * cl + q] += self.value(q, &diff) * other.values[lf * cl + q];
                }
            }
        }
        values.iter_mut().for_each(|z| *z *= scale);
        Ok(BlochField { lattice: self.lattice.clone(), values })
    }
}

/// Bloch transform by one full-box DFT followed by regrouping of the
/// frequency index into `(k, m)`.
pub fn bloch_transform(u: &ComplexField) -> BlochField {
    let lattice = u.lattice().clone();
    let dim = lattice.dim();
    let p = lattice.cell_points();
    let box_shape = lattice.box_shape();
    let box_strides = strides(&box_shape);
    let cells = lattice.num_cells().to_vec();

    let mut spec = u.values.clone();
    FftNd::new(&box_shape).forward(&mut spec);
    let norm = lattice.num_k() as f64 / lattice.len() as f64;

    let cell_shape = lattice.cell_shape();
    let cell_fft = FftNd::new(&cell_shape);
    let cl = lattice.cell_len();
    let nk = lattice.num_k();
    let mut values = vec![Complex64::default(); nk * cl];
    let lows: Vec<i64> = (0..dim).map(|j| *lattice.reduced_indices(j).start()).collect();

    for kf in 0..nk {
        let kidx = unravel(kf, &cells);
        let block = &mut values[kf * cl..(kf + 1) * cl];
        for (mf, slot) in block.iter_mut().enumerate() {
            let midx = unravel(mf, &cell_shape);
            let mut src = 0;
            for j in 0..dim {
                let r = kidx[j] + lows[j];
                let m = signed_index(midx[j] as usize, p);
                let s = r + cells[j] as i64 * m;
                src += wrap_index(s, box_shape[j]) * box_strides[j];
            }
            *slot = spec[src] * norm;
        }
        cell_fft.backward(block);
    }
    BlochField { lattice, values }
}

/// Inverse transform `u(x) = M^{-d} Σ_k ũ(x, k) e^{i k·x}`, evaluated per
/// cell point with an FFT over the reduced wavenumbers.
pub fn bloch_inverse(bf: &BlochField, box_offset: Vec<f64>) -> Result<ComplexField> {
    let lattice = bf.lattice.clone();
    let dim = lattice.dim();
    let p = lattice.cell_points();
    let cells = lattice.num_cells().to_vec();
    let cell_shape = lattice.cell_shape();
    let box_shape = lattice.box_shape();
    let box_strides = strides(&box_shape);
    let cl = lattice.cell_len();
    let nk = lattice.num_k();
    let dx = lattice.dx();
    let lows: Vec<i64> = (0..dim).map(|j| *lattice.reduced_indices(j).start()).collect();
    let k_fft = FftNd::new(&cells);

    let mut out = vec![Complex64::default(); lattice.len()];
    let mut lane = vec![Complex64::default(); nk];
    for q in 0..cl {
        let qidx = unravel(q, &cell_shape);
        for (kf, z) in lane.iter_mut().enumerate() {
            let kidx = unravel(kf, &cells);
            let phase: f64 = (0..dim)
                .map(|j| (kidx[j] + lows[j]) as f64 * qidx[j] as f64 * dx / cells[j] as f64)
                .sum();
            *z = bf.values[kf * cl + q] * Complex64::from_polar(1.0, phase);
        }
        k_fft.backward(&mut lane);
        for (cf, z) in lane.iter().enumerate() {
            let cidx = unravel(cf, &cells);
            let mut dest = 0;
            let mut phase = 0.0;
            for j in 0..dim {
                phase += std::f64::consts::TAU * (lows[j] * cidx[j]) as f64 / cells[j] as f64;
                dest += (cidx[j] as usize * p + qidx[j] as usize) * box_strides[j];
            }
            out[dest] = z * Complex64::from_polar(1.0 / nk as f64, phase);
        }
    }
    ComplexField::new(lattice, box_offset, out)
}
