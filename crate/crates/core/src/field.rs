use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{unravel, Lattice, MAX_DIM};

/// Complex field on the full box grid of a [`Lattice`].
///
/// Grid point `i` sits at `box_offset + i·dx`. The offset must be an integer
/// multiple of `2π` in every direction so that cell-periodic coefficients tile
/// the box with cell-local index `i mod P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub values: Vec<Complex64>,
    lattice: Lattice,
    box_offset: Vec<f64>,
    pub time: f64,
}

impl ComplexField {
    pub fn new(lattice: Lattice, box_offset: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Shape(format!(
                "field has {} values, lattice has {} points",
                values.len(),
                lattice.len()
            )));
        }
        check_offset(&lattice, &box_offset)?;
        Ok(Self { values, lattice, box_offset, time: 0.0 })
    }

    pub fn zeros(lattice: Lattice, box_offset: Vec<f64>) -> Result<Self> {
        let n = lattice.len();
        Self::new(lattice, box_offset, vec![Complex64::default(); n])
    }

    /// Box starting at the origin.
    pub fn from_fn<F>(lattice: Lattice, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let offset = vec![0.0; lattice.dim()];
        Self::from_fn_with_offset(lattice, offset, f).expect("zero offset is commensurate")
    }

    pub fn from_fn_with_offset<F>(lattice: Lattice, box_offset: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        check_offset(&lattice, &box_offset)?;
        let shape = lattice.box_shape();
        let dx = lattice.dx();
        let dim = lattice.dim();
        let values = (0..lattice.len())
            .into_par_iter()
            .map(|flat| {
                let idx = unravel(flat, &shape);
                let mut x = [0.0; MAX_DIM];
                for j in 0..dim {
                    x[j] = box_offset[j] + idx[j] as f64 * dx;
                }
                f(&x[..dim])
            })
            .collect();
        Ok(Self { values, lattice, box_offset, time: 0.0 })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn box_offset(&self) -> &[f64] {
        &self.box_offset
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.lattice.box_shape()
    }

    /// Physical coordinates of a flat grid index.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        let idx = unravel(flat, &self.shape());
        let dx = self.lattice.dx();
        (0..self.dim()).map(|j| self.box_offset[j] + idx[j] as f64 * dx).collect()
    }

    /// Flat index of the cell-local point for a flat box index.
    pub fn cell_local_index(&self, flat: usize) -> usize {
        let idx = unravel(flat, &self.shape());
        let p = self.lattice.cell_points();
        (0..self.dim()).fold(0, |acc, j| acc * p + (idx[j] as usize % p))
    }

    /// `Σ |u|² dx^d`, summed in fixed-size chunks so the result does not
    /// depend on thread scheduling.
    pub fn mass(&self) -> f64 {
        let partial: Vec<f64> = self
            .values
            .par_chunks(4096)
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .collect();
        partial.iter().sum::<f64>() * self.lattice.cell_volume_element()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.par_iter().map(|z| z.norm()).reduce(|| 0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexField) -> f64 {
        self.values
            .par_iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .reduce(|| 0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.par_iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Coordinates of the grid point with largest `|u|`; first index wins ties.
    pub fn peak_position(&self) -> Vec<f64> {
        let (flat, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
        self.coordinates(flat)
    }

    /// Translates the field content by `cells` periodicity cells along `axis`
    /// (periodic wraparound): `out(x) = u(x - 2π·cells·e_axis)`.
    pub fn shift_cells(&self, axis: usize, cells: i64) -> ComplexField {
        let shape = self.shape();
        let n = shape[axis] as i64;
        let by = cells * self.lattice.cell_points() as i64;
        let inner: usize = shape[axis + 1..].iter().product();
        let mut out = self.values.clone();
        for (flat, z) in self.values.iter().enumerate() {
            let i = (flat / inner) % shape[axis];
            let target = (i as i64 + by).rem_euclid(n) as usize;
            let dest = flat - i * inner + target * inner;
            out[dest] = *z;
        }
        ComplexField {
            values: out,
            lattice: self.lattice.clone(),
            box_offset: self.box_offset.clone(),
            time: self.time,
        }
    }
}

pub(crate) fn check_offset(lattice: &Lattice, offset: &[f64]) -> Result<()> {
    if offset.len() != lattice.dim() {
        return Err(Error::Shape("box offset dimension mismatch".into()));
    }
    for &o in offset {
        let cells = o / TAU;
        if (cells - cells.round()).abs() > 1e-9 {
            return Err(Error::Lattice(format!(
                "box offset {o} is not a multiple of 2π (grid would not be cell-commensurate)"
            )));
        }
    }
    Ok(())
}
