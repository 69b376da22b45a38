//! Radial ground state of the focusing envelope equation,
//!
//! ```text
//! (α/2)(R'' + (d-1)/r R') - R + ν R³ = 0,    R'(0) = 0,  R(∞) = 0,
//! ```
//!
//! found by bisection on `R(0)`. With `κ = √(2/α)` the solution is
//! `R(r) = ν^{-1/2} R̃(κ r)` where `R̃` solves the canonical problem
//! `R̃'' + (d-1)/ρ R̃' - R̃ + R̃³ = 0`.
//!
//! Shots with `R(0)` away from the ground state separate from it like
//! `e^{κr}·|ΔR(0)|`, so even a bisection to full precision only follows the
//! ground state up to `κr ≈ 25`. Beyond that point the profile is continued by
//! the decaying solution of the linearized equation (`e^{-κr}` for `d = 1`,
//! `K₀(κr)` for `d = 2`), matched in value well inside the trusted range.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ode::{Integrator, Outcome, Tolerances};
use crate::plot::{LinePlot, Series};

/// Profile values below this count as decayed.
pub const TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Profile extent in canonical units `ρ = κr`.
    pub rho_max: f64,
    /// Uniform output spacing in canonical units.
    pub d_rho: f64,
    pub bracket: (f64, f64),
    pub bracket_tol: f64,
    pub max_iter: usize,
    /// Offset of the series start from the singular origin.
    pub h0: f64,
    pub rtol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            rho_max: 30.0,
            d_rho: 5e-4,
            bracket: (0.1, 100.0),
            bracket_tol: 1e-12,
            max_iter: 200,
            h0: 1e-6,
            rtol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub r_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub r0: f64,
    pub alpha: f64,
    pub nu: f64,
    pub dim: usize,
    /// Radius where the numerical shot hands over to the asymptotic tail.
    pub r_match: f64,
    pub iterations: usize,
    pub bracket_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `R` changed sign: `R(0)` too large.
    Over,
    /// `R'` turned positive while `R > 0`: `R(0)` too small.
    Under,
    /// Neither before the end of the range.
    Neither,
}

struct Problem {
    alpha: f64,
    nu: f64,
    dim: usize,
    kappa: f64,
    opts: ShootingOptions,
}

impl Problem {
    fn rhs(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        let c = 2.0 / self.alpha;
        let dm1 = (self.dim - 1) as f64;
        move |r, y| [y[1], c * (y[0] - self.nu * y[0].powi(3)) - dm1 / r * y[1]]
    }

    /// State at `h0` from the Taylor expansion at the origin.
    fn start(&self, r0: f64) -> (f64, [f64; 2]) {
        let h = self.opts.h0 / self.kappa;
        let curv = (2.0 / self.alpha) * (r0 - self.nu * r0.powi(3)) / self.dim as f64;
        (h, [r0 + 0.5 * curv * h * h, curv * h])
    }

    fn integrator(&self, r0: f64) -> Integrator<2> {
        Integrator::new(Tolerances { rtol: self.opts.rtol, atol: 1e-15 * r0 }, 1e-3 / self.kappa)
    }

    /// Integrates until the shot classifies itself; returns the class and the
    /// radius where it did.
    fn shoot(&self, r0: f64) -> Result<(Shot, f64)> {
        let (mut r, mut y) = self.start(r0);
        let f = self.rhs();
        let mut it = self.integrator(r0);
        let mut class = Shot::Neither;
        let r_end = 2.0 * self.opts.rho_max / self.kappa;
        let out = it.integrate(&f, &mut r, &mut y, r_end, |_, y| {
            if y[0] < 0.0 {
                class = Shot::Over;
                true
            } else if y[1] > 0.0 {
                class = Shot::Under;
                true
            } else {
                false
            }
        })?;
        if out == Outcome::Reached {
            class = Shot::Neither;
        }
        Ok((class, r))
    }
}

/// Ground state of the radial envelope equation by bisection shooting.
pub fn townes_shoot(alpha: f64, nu: f64, dim: usize, opts: &ShootingOptions) -> Result<RadialProfile> {
    if !(alpha > 0.0) || !(nu > 0.0) {
        return Err(Error::Config(format!(
            "shooting needs a focusing equation (alpha={alpha}, nu={nu})"
        )));
    }
    if !(1..=2).contains(&dim) {
        return Err(Error::Config(format!("radial profile for d={dim} is not supported")));
    }
    let kappa = (2.0 / alpha).sqrt();
    let pb = Problem { alpha, nu, dim, kappa, opts: *opts };

    let (mut lo, mut hi) = opts.bracket;
    let (c_lo, mut r_lo) = pb.shoot(lo)?;
    let (c_hi, mut r_hi) = pb.shoot(hi)?;
    if c_lo != Shot::Under || c_hi != Shot::Over {
        return Err(Error::Bracket { lo, hi });
    }
    let mut iterations = 0;
    let mut exact = None;
    while hi - lo > opts.bracket_tol && iterations < opts.max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        match pb.shoot(mid)? {
            (Shot::Over, r) => {
                hi = mid;
                r_hi = r;
            }
            (Shot::Under, r) => {
                lo = mid;
                r_lo = r;
            }
            (Shot::Neither, _) => {
                exact = Some(mid);
                break;
            }
        }
    }
    let r0 = exact.unwrap_or(0.5 * (lo + hi));
    let r_event = if exact.is_some() { 2.0 * opts.rho_max / kappa } else { r_lo.min(r_hi) };
    let r_match = (r_event - 7.0 / kappa).min(opts.rho_max / kappa);
    if r_match <= 1.0 / kappa {
        return Err(Error::Stiffness(format!("shots separate already at r={r_event}")));
    }
    log::debug!("shooting: R(0)={r0} after {iterations} bisections, r_match={r_match}");

    // sample the shot on the uniform grid, then continue with the tail
    let dr = opts.d_rho / kappa;
    let n = (opts.rho_max / opts.d_rho).round() as usize + 1;
    let r_grid: Vec<f64> = (0..n).map(|i| i as f64 * dr).collect();
    let mut values = vec![0.0; n];
    let mut derivatives = vec![0.0; n];
    values[0] = r0;
    let f = pb.rhs();
    let (mut r, mut y) = pb.start(r0);
    let mut it = pb.integrator(r0);
    let mut matched = n;
    for i in 1..n {
        if r_grid[i] > r_match {
            matched = i;
            break;
        }
        it.integrate(&f, &mut r, &mut y, r_grid[i], |_, _| false)?;
        values[i] = y[0];
        derivatives[i] = y[1];
    }
    if matched < n {
        // split the shot at the seam into decaying and growing linear modes;
        // the growing part is bisection noise and is removed everywhere so
        // that value and slope stay continuous across the seam
        let i0 = matched - 1;
        let (dv, dd) = linear_tail(dim, kappa, r_grid[i0]);
        let (gv, gd) = linear_growing(dim, kappa, r_grid[i0]);
        let w = dv * gd - dd * gv;
        let a = (values[i0] * gd - derivatives[i0] * gv) / w;
        let b = (dv * derivatives[i0] - dd * values[i0]) / w;
        for i in 0..matched {
            let (g, gp) = linear_growing(dim, kappa, r_grid[i]);
            values[i] -= b * g;
            derivatives[i] -= b * gp;
        }
        for i in matched..n {
            let (v, d) = linear_tail(dim, kappa, r_grid[i]);
            values[i] = a * v;
            derivatives[i] = a * d;
        }
    }
    let profile = RadialProfile {
        r_grid,
        values,
        derivatives,
        r0,
        alpha,
        nu,
        dim,
        r_match: r_grid_at(matched, dr),
        iterations,
        bracket_width: hi - lo,
    };
    if profile.values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Stiffness("profile is not strictly positive".into()));
    }
    Ok(profile)
}

fn r_grid_at(i: usize, dr: f64) -> f64 {
    i.saturating_sub(1) as f64 * dr
}

/// Growing solution of `R'' + (d-1)/r R' = κ² R` and its derivative.
fn linear_growing(dim: usize, kappa: f64, r: f64) -> (f64, f64) {
    let z = kappa * r;
    match dim {
        1 => {
            let v = z.exp();
            (v, kappa * v)
        }
        _ => {
            // I0 and I1 by their power series, all terms positive
            let q = 0.25 * z * z;
            let (mut t0, mut t1) = (1.0, 0.5 * z);
            let (mut i0, mut i1) = (t0, t1);
            for k in 1..200 {
                let kf = k as f64;
                t0 *= q / (kf * kf);
                t1 *= q / (kf * (kf + 1.0));
                i0 += t0;
                i1 += t1;
                if t0 < 1e-17 * i0 && t1 < 1e-17 * i1 {
                    break;
                }
            }
            (i0, kappa * i1)
        }
    }
}

/// Decaying solution of `R'' + (d-1)/r R' = κ² R` and its derivative, up to a
/// constant factor.
fn linear_tail(dim: usize, kappa: f64, r: f64) -> (f64, f64) {
    let z = kappa * r;
    match dim {
        1 => {
            let v = (-z).exp();
            (v, -kappa * v)
        }
        _ => {
            let (k0, k1) = bessel_k01(z);
            (k0, -kappa * k1)
        }
    }
}

/// `K0(z)` and `K1(z)` for `z > 0` from `K_n(z) = ∫_0^∞ e^{-z cosh t} cosh(nt) dt`.
/// The trapezoidal rule converges geometrically for this analytic integrand.
fn bessel_k01(z: f64) -> (f64, f64) {
    let h = 0.05;
    let (mut k0, mut k1) = (0.5 * (-z).exp(), 0.5 * (-z).exp());
    for i in 1.. {
        let t = i as f64 * h;
        let w = (-z * t.cosh()).exp();
        k0 += w;
        k1 += w * t.cosh();
        if w < 1e-18 * k0 {
            break;
        }
    }
    (h * k0, h * k1)
}

impl RadialProfile {
    pub fn r_max(&self) -> f64 {
        *self.r_grid.last().unwrap()
    }

    pub fn kappa(&self) -> f64 {
        (2.0 / self.alpha).sqrt()
    }

    /// `(R(r), R'(r))` by cubic Hermite interpolation; zero beyond `r_max`
    /// when the profile has decayed there.
    pub fn eval_with_derivative(&self, r: f64) -> Result<(f64, f64)> {
        let r = r.abs();
        let r_max = self.r_max();
        if r >= r_max {
            let tail = *self.values.last().unwrap();
            if tail > TAIL_TOL {
                return Err(Error::ProfileRange { r, r_max, tail });
            }
            return Ok((0.0, 0.0));
        }
        let h = self.r_grid[1] - self.r_grid[0];
        let i = ((r / h) as usize).min(self.r_grid.len() - 2);
        let t = (r - self.r_grid[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivatives[i] * h, self.derivatives[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        Ok((v, dv))
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.eval_with_derivative(r)?.0)
    }

    /// `max_i |(α/2)(R'' + (d-1)R'/r) - R + νR³|` over interior nodes, with
    /// `R''` by a centered difference on the output grid.
    pub fn ode_residual(&self) -> f64 {
        // fourth-order stencils: `R''` from values, `R'` from the stored slopes
        let h = self.r_grid[1] - self.r_grid[0];
        let dm1 = (self.dim - 1) as f64;
        let v = &self.values;
        (2..v.len() - 2)
            .map(|i| {
                let d2 = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) / (12.0 * h * h);
                let lap = d2 + dm1 * self.derivatives[i] / self.r_grid[i];
                (0.5 * self.alpha * lap - v[i] + self.nu * v[i].powi(3)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `∫_0^{r_max} R² r^{d-1} dr` (trapezoidal).
    pub fn radial_mass(&self) -> f64 {
        let h = self.r_grid[1] - self.r_grid[0];
        let f: Vec<f64> = self
            .r_grid
            .iter()
            .zip(&self.values)
            .map(|(r, v)| v * v * r.powi(self.dim as i32 - 1))
            .collect();
        h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[f.len() - 1]))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// `r,R` rows, decimated to at most `max_rows` data rows.
    pub fn to_csv(&self, max_rows: usize) -> String {
        let stride = (self.r_grid.len() / max_rows.max(1)).max(1);
        let mut out = String::from("r,R\n");
        for i in (0..self.r_grid.len()).step_by(stride) {
            let _ = writeln!(out, "{:.10e},{:.12e}", self.r_grid[i], self.values[i]);
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let r_show = 12.0 / self.kappa();
        let stride = (self.r_grid.len() / 1500).max(1);
        let pts: Vec<(f64, f64)> = self
            .r_grid
            .iter()
            .zip(&self.values)
            .step_by(stride)
            .filter(|(r, _)| **r <= r_show)
            .map(|(r, v)| (*r, *v))
            .collect();
        let mut plot = LinePlot::new(
            &format!("Radial profile (d={}, alpha={:.4}, nu={:.5})", self.dim, self.alpha, self.nu),
            "r",
            "R(r)",
        );
        plot.add(Series::line("R", pts));
        plot.add_note(format!("R(0) = {:.8}", self.r0));
        plot.render()
    }
}
