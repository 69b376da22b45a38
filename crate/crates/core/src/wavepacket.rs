//! The modulated Bloch wave
//!
//! ```text
//! u_app(x, t) = ε e^{iε²t} R(ε|x - v_g t - ξ|) p_{n0}(x, k0) e^{i(k0·x - ω0 t)}
//! ```
//!
//! on a box grid, its distance to a computed solution and its GP residual.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bands::BlochMode;
use crate::dynamics::GpSystem;
use crate::effective::{EffectiveNlsParams, NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::field::{check_offset, ComplexField};
use crate::lattice::{signed_index, unravel, Lattice, MAX_DIM};
use crate::townes::RadialProfile;

#[derive(Debug, Clone)]
pub struct WavepacketSpec {
    pub eps: f64,
    pub params: EffectiveNlsParams,
    pub profile: RadialProfile,
    pub mode: BlochMode,
    /// Envelope center `ξ` at `t = 0`.
    pub center: Vec<f64>,
}

impl WavepacketSpec {
    pub fn new(
        eps: f64,
        params: EffectiveNlsParams,
        profile: RadialProfile,
        mode: BlochMode,
        center: Vec<f64>,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Config(format!("eps={eps} must lie in (0, 1)")));
        }
        let d = params.dim();
        if center.len() != d || mode.dim() != d || profile.dim != d {
            return Err(Error::Shape("wavepacket components have different dimensions".into()));
        }
        let alpha = params.alpha();
        if (profile.alpha - alpha).abs() > 1e-12 * alpha.abs() || profile.nu != params.nu {
            return Err(Error::Config(format!(
                "profile (alpha={}, nu={}) does not match the parameters (alpha={alpha}, nu={})",
                profile.alpha, profile.nu, params.nu
            )));
        }
        let dev = (mode.l2_norm_sqr() - 1.0).abs();
        if dev > NORMALIZATION_TOL {
            return Err(Error::Normalization(dev));
        }
        Ok(Self { eps, params, profile, mode, center })
    }

    /// `ξ + v_g t`.
    pub fn envelope_center(&self, t: f64) -> Vec<f64> {
        self.center.iter().zip(&self.params.v_g).map(|(c, v)| c + v * t).collect()
    }
}

/// Time-independent parts of the ansatz on one grid.
pub struct AnsatzGrid<'a> {
    ws: &'a WavepacketSpec,
    lattice: Lattice,
    box_offset: Vec<f64>,
    /// `p(x) e^{i k0·x}` at every grid point.
    carrier: Vec<Complex64>,
}

impl<'a> AnsatzGrid<'a> {
    pub fn new(ws: &'a WavepacketSpec, lattice: &Lattice, box_offset: &[f64]) -> Result<Self> {
        check_offset(lattice, box_offset)?;
        if lattice.dim() != ws.params.dim() {
            return Err(Error::Shape("lattice and wavepacket dimensions differ".into()));
        }
        let p = lattice.cell_points();
        let cell = ws.mode.evaluate_cell(p);
        let shape = lattice.box_shape();
        let dx = lattice.dx();
        let dim = lattice.dim();
        let k0 = &ws.params.k0;
        let carrier = (0..lattice.len())
            .into_par_iter()
            .map(|flat| {
                let idx = unravel(flat, &shape);
                let mut local = 0;
                let mut phase = 0.0;
                for j in 0..dim {
                    local = local * p + idx[j] as usize % p;
                    phase += k0[j] * (box_offset[j] + idx[j] as f64 * dx);
                }
                cell[local] * Complex64::from_polar(1.0, phase)
            })
            .collect();
        Ok(Self { ws, lattice: lattice.clone(), box_offset: box_offset.to_vec(), carrier })
    }

    fn relative(&self, flat: usize, center: &[f64]) -> [f64; MAX_DIM] {
        let idx = unravel(flat, &self.lattice.box_shape());
        let dx = self.lattice.dx();
        let mut out = [0.0; MAX_DIM];
        for j in 0..self.lattice.dim() {
            out[j] = self.box_offset[j] + idx[j] as f64 * dx - center[j];
        }
        out
    }

    fn time_factor(&self, t: f64) -> Complex64 {
        let ws = self.ws;
        Complex64::from_polar(ws.eps, ws.eps * ws.eps * t - ws.params.omega0 * t)
    }

    /// `u_app(·, t)`.
    pub fn field(&self, t: f64) -> Result<ComplexField> {
        let ws = self.ws;
        let center = ws.envelope_center(t);
        let amp = self.time_factor(t);
        let values = (0..self.lattice.len())
            .into_par_iter()
            .map(|flat| {
                let x = self.relative(flat, &center);
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                Ok(self.carrier[flat] * (amp * ws.profile.eval(ws.eps * r)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut u = ComplexField::new(self.lattice.clone(), self.box_offset.clone(), values)?;
        u.time = t;
        Ok(u)
    }

    /// `∂_t u_app(·, t)` from the closed form.
    pub fn time_derivative(&self, t: f64) -> Result<Vec<Complex64>> {
        let ws = self.ws;
        let center = ws.envelope_center(t);
        let amp = self.time_factor(t);
        let rot = Complex64::new(0.0, ws.eps * ws.eps - ws.params.omega0);
        let dim = self.lattice.dim();
        let v_g = &ws.params.v_g;
        (0..self.lattice.len())
            .into_par_iter()
            .map(|flat| {
                let x = self.relative(flat, &center);
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let (rv, dr) = ws.profile.eval_with_derivative(ws.eps * r)?;
                // d/dt R(ε|X|) = ε R'(ε|X|) (X/|X|)·(-v_g)
                let radial = if r > 0.0 {
                    -ws.eps * dr * (0..dim).map(|j| x[j] * v_g[j]).sum::<f64>() / r
                } else {
                    0.0
                };
                Ok(self.carrier[flat] * amp * (rot * rv + radial))
            })
            .collect()
    }
}

/// `u_app(·, t)` on a fresh grid.
pub fn assemble_ansatz(ws: &WavepacketSpec, lattice: &Lattice, box_offset: &[f64], t: f64) -> Result<ComplexField> {
    AnsatzGrid::new(ws, lattice, box_offset)?.field(t)
}

/// `max_x |u(x) - u_app(x, u.time)|`.
pub fn sup_error(u: &ComplexField, grid: &AnsatzGrid<'_>) -> Result<f64> {
    let app = grid.field(u.time)?;
    Ok(u.max_abs_diff(&app))
}

/// Spectral Laplacian on the periodic box.
pub fn laplacian(u: &ComplexField) -> Vec<Complex64> {
    let lattice = u.lattice();
    let shape = lattice.box_shape();
    let cells = lattice.num_cells().to_vec();
    let fft = FftNd::new(&shape);
    let mut spec = u.values.clone();
    fft.forward(&mut spec);
    let scale = 1.0 / lattice.len() as f64;
    spec.par_iter_mut().enumerate().for_each(|(flat, z)| {
        let idx = unravel(flat, &shape);
        let xi2: f64 = (0..lattice.dim())
            .map(|j| (signed_index(idx[j] as usize, shape[j]) as f64 / cells[j] as f64).powi(2))
            .sum();
        *z *= -xi2 * scale;
    });
    fft.backward(&mut spec);
    spec
}

/// `sup_x |i∂_t u_app + Δu_app - V u_app - σ|u_app|² u_app|` at time `t`.
pub fn gp_residual(ws: &WavepacketSpec, system: &GpSystem, box_offset: &[f64], t: f64) -> Result<f64> {
    let grid = AnsatzGrid::new(ws, system.lattice(), box_offset)?;
    let u = grid.field(t)?;
    let dt = grid.time_derivative(t)?;
    let lap = laplacian(&u);
    let i = Complex64::new(0.0, 1.0);
    Ok(u
        .values
        .par_iter()
        .zip(dt.par_iter().zip(&lap))
        .zip(system.potential().par_iter().zip(system.sigma()))
        .map(|((z, (d, l)), (v, s))| (i * d + l - z * (v + s * z.norm_sqr())).norm())
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub sup_error: Vec<f64>,
    pub mass: Vec<f64>,
    pub peak_position: Vec<Vec<f64>>,
}

impl ErrorSeries {
    pub fn push(&mut self, t: f64, err: f64, mass: f64, peak: Vec<f64>) {
        self.times.push(t);
        self.sup_error.push(err);
        self.mass.push(mass);
        self.peak_position.push(peak);
    }

    pub fn max_error(&self) -> f64 {
        self.sup_error.iter().cloned().fold(0.0, f64::max)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.sup_error.last().copied()
    }

    pub fn to_csv(&self) -> String {
        let d = self.peak_position.first().map_or(1, Vec::len);
        let mut out = String::from("t,sup_error,mass");
        for j in 1..=d {
            let _ = write!(out, ",peak_x{j}");
        }
        out.push('\n');
        for i in 0..self.times.len() {
            let _ = write!(out, "{:.6},{:.10e},{:.12e}", self.times[i], self.sup_error[i], self.mass[i]);
            for p in &self.peak_position[i] {
                let _ = write!(out, ",{p:.6}");
            }
            out.push('\n');
        }
        out
    }
}

/// Mass of the ansatz envelope, `ε^{2-d} ∫ R(|y|)² dy · ⟨|p|²⟩_P`, for
/// reference in reports.
pub fn ansatz_mass_estimate(ws: &WavepacketSpec) -> f64 {
    let d = ws.params.dim() as i32;
    let sphere = if d == 1 { 2.0 } else { TAU };
    let cell_mean = ws.mode.l2_norm_sqr() / TAU.powi(d);
    ws.eps.powi(2 - d) * sphere * ws.profile.radial_mass() * cell_mean
}
