//! Periodicity-cell geometry and the index conventions shared by every grid in
//! the crate.
//!
//! A [`Lattice`] describes a rectangular box made of `num_cells[j]` copies of
//! the `2π`-periodic cell in direction `j`, each cell resolved by `cell_points`
//! samples. Box wavenumbers are `ξ = s / M` with `s` a signed DFT index, which
//! decomposes uniquely as `ξ = k + m` with `k` on the reduced grid of the
//! Brillouin zone `(-1/2, 1/2]` and `m` an integer.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Largest spatial dimension supported by the grids.
pub const MAX_DIM: usize = 2;

/// Integer multi-index padded with zeros beyond the active dimension.
pub type MultiIndex = [i64; MAX_DIM];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    cell_points: usize,
    num_cells: Vec<usize>,
}

impl Lattice {
    pub fn new(dim: usize, cell_points: usize, num_cells: Vec<usize>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Lattice(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if cell_points < 4 || cell_points % 2 != 0 {
            return Err(Error::Lattice(format!(
                "cell_points must be even and >= 4, got {cell_points}"
            )));
        }
        if num_cells.len() != dim {
            return Err(Error::Lattice(format!(
                "expected {dim} cell counts, got {}",
                num_cells.len()
            )));
        }
        if num_cells.iter().any(|&m| m == 0) {
            return Err(Error::Lattice("cell counts must be positive".into()));
        }
        Ok(Self { dim, cell_points, num_cells })
    }

    /// Same number of cells in every direction.
    pub fn cubic(dim: usize, cell_points: usize, cells: usize) -> Result<Self> {
        Self::new(dim, cell_points, vec![cells; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_points(&self) -> usize {
        self.cell_points
    }

    pub fn num_cells(&self) -> &[usize] {
        &self.num_cells
    }

    pub fn dx(&self) -> f64 {
        TAU / self.cell_points as f64
    }

    /// Volume element `dx^d`.
    pub fn cell_volume_element(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn box_shape(&self) -> Vec<usize> {
        self.num_cells.iter().map(|&m| m * self.cell_points).collect()
    }

    pub fn box_lengths(&self) -> Vec<f64> {
        self.num_cells.iter().map(|&m| TAU * m as f64).collect()
    }

    pub fn cell_shape(&self) -> Vec<usize> {
        vec![self.cell_points; self.dim]
    }

    /// Total number of box grid points.
    pub fn len(&self) -> usize {
        self.box_shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_len(&self) -> usize {
        self.cell_points.pow(self.dim as u32)
    }

    /// Number of reduced wavenumbers (`∏ M_j`).
    pub fn num_k(&self) -> usize {
        self.num_cells.iter().product()
    }

    /// Reduced wavenumber indices `r` with `k = r / M` along one axis,
    /// ascending over `(-M/2, M/2]`.
    pub fn reduced_indices(&self, axis: usize) -> std::ops::RangeInclusive<i64> {
        let m = self.num_cells[axis] as i64;
        let lo = -((m - 1) / 2);
        lo..=lo + m - 1
    }

    /// Box index of the cell-local point `q` in cell `c` along one axis.
    pub fn box_index(&self, cell: usize, q: usize) -> usize {
        cell * self.cell_points + q
    }
}

/// Signed representative of a DFT index: `j` in `[0, n)` mapped to `(-n/2, n/2]`.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Inverse of [`signed_index`] modulo `n`.
pub fn wrap_index(s: i64, n: usize) -> usize {
    s.rem_euclid(n as i64) as usize
}

/// Splits a signed box frequency index `s` (wavenumber `s/M`) into the reduced
/// index `r` in `(-M/2, M/2]` and the integer shift `m` with `s = r + M m`.
pub fn split_frequency(s: i64, cells: usize) -> (i64, i64) {
    let m = cells as i64;
    let r = signed_index(s.rem_euclid(m) as usize, cells);
    (r, (s - r) / m)
}

/// Row-major strides for a shape.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut out = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        out[a] = out[a + 1] * shape[a + 1];
    }
    out
}

/// Unravels a flat row-major index.
pub fn unravel(mut flat: usize, shape: &[usize]) -> MultiIndex {
    let mut idx = [0i64; MAX_DIM];
    for a in (0..shape.len()).rev() {
        idx[a] = (flat % shape[a]) as i64;
        flat /= shape[a];
    }
    idx
}

/// Enumerates `{-n..=n}^dim` in row-major order.
pub fn cube_modes(dim: usize, n: usize) -> Vec<MultiIndex> {
    let n = n as i64;
    let side = (2 * n + 1) as usize;
    (0..side.pow(dim as u32))
        .map(|flat| {
            let mut idx = unravel(flat, &vec![side; dim]);
            for c in idx.iter_mut().take(dim) {
                *c -= n;
            }
            idx
        })
        .collect()
}

/// Named high-symmetry points of the Brillouin zone (`Γ`, `X`, `M`).
pub fn symmetry_point(label: char, dim: usize) -> Option<Vec<f64>> {
    let p = match (label.to_ascii_uppercase(), dim) {
        ('G', _) => vec![0.0; dim],
        ('X', 1) => vec![0.5],
        ('X', 2) => vec![0.5, 0.0],
        ('Y', 2) => vec![0.0, 0.5],
        ('M', 2) => vec![0.5, 0.5],
        _ => return None,
    };
    Some(p)
}

/// Reduces a wavevector into `(-1/2, 1/2]^d`; returns the reduced vector and
/// the integer shift `s` with `k = k_red + s`.
pub fn reduce_to_zone(k: &[f64]) -> (Vec<f64>, Vec<i64>) {
    let mut red = Vec::with_capacity(k.len());
    let mut shift = Vec::with_capacity(k.len());
    for &kj in k {
        // ceil(k - 1/2) maps (-1/2, 1/2] to 0
        let s = (kj - 0.5).ceil();
        red.push(kj - s);
        shift.push(s as i64);
    }
    (red, shift)
}
