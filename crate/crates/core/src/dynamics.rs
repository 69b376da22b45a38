//! Strang split-step integration of
//! `i ∂_t u = -Δu + V(x) u + σ(x)|u|² u` on a periodic box.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coefficients::PeriodicCoefficients;
use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::field::ComplexField;
use crate::lattice::{signed_index, unravel, Lattice};

/// `V` and `σ` tiled over the box.
#[derive(Debug, Clone)]
pub struct GpSystem {
    lattice: Lattice,
    potential: Vec<f64>,
    sigma: Vec<f64>,
}

impl GpSystem {
    pub fn new(lattice: Lattice, potential: &PeriodicCoefficients, sigma: &PeriodicCoefficients) -> Result<Self> {
        let v = potential.sample(&lattice)?;
        let s = sigma.sample(&lattice)?;
        Ok(Self { potential: tile(&lattice, &v), sigma: tile(&lattice, &s), lattice })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
}

/// Repeats cell samples over every cell of the box.
pub fn tile(lattice: &Lattice, cell: &[f64]) -> Vec<f64> {
    let shape = lattice.box_shape();
    let p = lattice.cell_points();
    let dim = lattice.dim();
    (0..lattice.len())
        .map(|flat| {
            let idx = unravel(flat, &shape);
            let local = (0..dim).fold(0, |acc, j| acc * p + idx[j] as usize % p);
            cell[local]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    /// Signed time step; negative steps run the flow backwards.
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl StepperConfig {
    pub fn num_steps(&self) -> Result<usize> {
        if self.dt == 0.0 || !self.dt.is_finite() || self.record_every == 0 {
            return Err(Error::Config(format!("invalid stepper configuration {self:?}")));
        }
        let n = self.t_end / self.dt;
        if n < 0.0 || (n - n.round()).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "t_end={} is not an integer multiple of dt={}",
                self.t_end, self.dt
            )));
        }
        Ok(n.round() as usize)
    }
}

/// Precomputed split-step propagators for a fixed `dt`.
pub struct Stepper<'a> {
    system: &'a GpSystem,
    fft: FftNd,
    dt: f64,
    /// `e^{-i|ξ|²dt} / len`.
    free: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(system: &'a GpSystem, dt: f64) -> Self {
        let lattice = &system.lattice;
        let shape = lattice.box_shape();
        let cells = lattice.num_cells().to_vec();
        let scale = 1.0 / lattice.len() as f64;
        let free = (0..lattice.len())
            .into_par_iter()
            .map(|flat| {
                let idx = unravel(flat, &shape);
                let xi2: f64 = (0..lattice.dim())
                    .map(|j| (signed_index(idx[j] as usize, shape[j]) as f64 / cells[j] as f64).powi(2))
                    .sum();
                Complex64::from_polar(scale, -xi2 * dt)
            })
            .collect();
        Self { system, fft: FftNd::new(&shape), dt, free }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Exact flow of `i u_t = -Δu` over `dt`.
    pub fn linear_step(&self, u: &mut ComplexField) {
        self.fft.forward(&mut u.values);
        u.values.par_iter_mut().zip(&self.free).for_each(|(z, m)| *z *= m);
        self.fft.backward(&mut u.values);
    }

    /// Exact flow of `i u_t = (V + σ|u|²) u` over `fraction · dt`.
    pub fn nonlinear_step(&self, u: &mut ComplexField, fraction: f64) {
        let tau = fraction * self.dt;
        u.values
            .par_iter_mut()
            .zip(self.system.potential.par_iter().zip(&self.system.sigma))
            .for_each(|(z, (v, s))| {
                let theta = -(v + s * z.norm_sqr()) * tau;
                let (sn, cs) = theta.sin_cos();
                *z *= Complex64::new(cs, sn);
            });
    }

    /// `n` Strang steps `N(dt/2) L(dt) N(dt/2)`, with adjacent half steps
    /// fused. `observe` sees the field after step 0 and after every
    /// `record_every`-th step as well as the last one.
    pub fn evolve<F>(&self, u: &mut ComplexField, n: usize, record_every: usize, mut observe: F) -> Result<()>
    where
        F: FnMut(&ComplexField, usize) -> Result<()>,
    {
        let t0 = u.time;
        observe(u, 0)?;
        if n == 0 {
            return Ok(());
        }
        self.nonlinear_step(u, 0.5);
        for step in 1..=n {
            self.linear_step(u);
            let record = step == n || step % record_every == 0;
            if record {
                self.nonlinear_step(u, 0.5);
                u.time = t0 + step as f64 * self.dt;
                if !u.is_finite() {
                    return Err(Error::NonFinite { step, time: u.time });
                }
                observe(u, step)?;
                if step < n {
                    self.nonlinear_step(u, 0.5);
                }
            } else {
                self.nonlinear_step(u, 1.0);
            }
        }
        Ok(())
    }
}

/// Evolves `u0` to `t0 + cfg.t_end`, calling `observe` at record points.
pub fn strang_evolve<F>(
    u0: &ComplexField,
    system: &GpSystem,
    cfg: &StepperConfig,
    observe: F,
) -> Result<ComplexField>
where
    F: FnMut(&ComplexField, usize) -> Result<()>,
{
    if u0.lattice() != system.lattice() {
        return Err(Error::Shape("field and system live on different lattices".into()));
    }
    let n = cfg.num_steps()?;
    let stepper = Stepper::new(system, cfg.dt);
    let mut u = u0.clone();
    stepper.evolve(&mut u, n, cfg.record_every, observe)?;
    Ok(u)
}
