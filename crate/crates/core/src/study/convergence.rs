use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{BoxPolicy, ModelKind, StudyConfig};
use crate::bands::BlochMode;
use crate::dynamics::{GpSystem, Stepper, StepperConfig};
use crate::effective::{effective_params, EffectiveNlsParams};
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::lattice::Lattice;
use crate::townes::{townes_shoot, RadialProfile};
use crate::wavepacket::{sup_error, AnsatzGrid, ErrorSeries, WavepacketSpec};

/// Grids above this many points need an explicit opt-in.
pub const LARGE_GRID: usize = 1 << 22;
/// Margin added to every scaled box half-width, in cells.
const MARGIN_CELLS: f64 = 10.0;

/// Rounds `t` up to a whole number of steps of size `dt`.
pub fn snap_to_steps(t: f64, dt: f64) -> f64 {
    let n = t / dt;
    let n = if (n - n.round()).abs() < 1e-9 * n.max(1.0) { n.round() } else { n.ceil() };
    n * dt
}

/// Least-squares line through `(log ε, log e)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn fit_slope(eps: &[f64], errors: &[f64]) -> Result<SlopeFit> {
    if eps.len() != errors.len() || eps.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least two (eps, error) pairs, got {} and {}",
            eps.len(),
            errors.len()
        )));
    }
    if let Some(bad) = eps.iter().chain(errors).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("non-positive or non-finite value {bad}")));
    }
    let x: Vec<f64> = eps.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all eps values coincide".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual =
        (x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SlopeFit { slope, intercept, residual })
}

/// Annotation used for fitted slopes in reports and plots.
pub fn format_slope(slope: f64) -> String {
    format!("fitted slope {slope:.4}")
}

/// Box geometry for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxGeometry {
    pub cells: Vec<usize>,
    pub offset: Vec<f64>,
    /// Initial envelope center.
    pub center: Vec<f64>,
}

impl BoxGeometry {
    pub fn lattice(&self, cell_points: usize) -> Result<Lattice> {
        Lattice::new(self.cells.len(), cell_points, self.cells.clone())
    }

    pub fn num_points(&self, cell_points: usize) -> usize {
        self.cells.iter().map(|m| m * cell_points).product()
    }
}

/// Smallest integer `≥ n` whose only prime factors are 2, 3 and 5.
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Box covering `[-half_j, half_j]` in every direction, snapped to whole
/// cells, with the pulse starting half a travel distance behind the origin.
pub fn box_geometry(policy: &BoxPolicy, eps: f64, v_g: &[f64], t_end: f64) -> BoxGeometry {
    let d = v_g.len();
    let halves: Vec<f64> = match policy {
        BoxPolicy::Full => {
            let mut h = vec![40.0 * PI; d];
            h[0] = 20.0 * PI + 5.0 / (4.0 * eps * eps);
            h
        }
        BoxPolicy::Scaled { factor } => (0..d)
            .map(|j| 0.5 * v_g[j].abs() * t_end + factor / eps + MARGIN_CELLS * TAU)
            .collect(),
    };
    let cells: Vec<usize> = halves.iter().map(|h| next_smooth((2.0 * h / TAU).ceil() as usize)).collect();
    let offset = cells.iter().map(|&m| -((m / 2) as f64) * TAU).collect();
    let center = v_g.iter().map(|v| -0.5 * v * t_end).collect();
    BoxGeometry { cells, offset, center }
}

/// Effective parameters, carrier mode and soliton shared by every `ε`.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub params: EffectiveNlsParams,
    pub mode: BlochMode,
    pub profile: RadialProfile,
}

impl StudySetup {
    pub fn new(cfg: &StudyConfig) -> Result<Self> {
        if cfg.model != ModelKind::Gp {
            return Err(Error::Config("the convergence study integrates the GP model only".into()));
        }
        let op = cfg.carrier_operator()?;
        let (params, mode) = effective_params(&op, &cfg.k0, cfg.n0, &cfg.nonlinearity()?)?;
        let alpha = params.isotropic_alpha()?;
        let profile = townes_shoot(alpha, params.nu, cfg.dim, &cfg.shooting_options())?;
        Ok(Self { params, mode, profile })
    }

    pub fn wavepacket(&self, eps: f64, center: Vec<f64>) -> Result<WavepacketSpec> {
        WavepacketSpec::new(eps, self.params.clone(), self.profile.clone(), self.mode.clone(), center)
    }
}

/// Observed `|u|` along the two axes through the moving envelope center.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Slices {
    pub times: Vec<f64>,
    pub x1: Vec<f64>,
    /// `|u(x1, c2)|` per recorded time.
    pub along_x1: Vec<Vec<f64>>,
    pub x2: Vec<f64>,
    /// `|u(c1 + v_{g,1} t, x2)|` per recorded time.
    pub along_x2: Vec<Vec<f64>>,
}

impl Slices {
    fn capture(&mut self, u: &ComplexField, center: &[f64]) {
        let shape = u.shape();
        let dx = u.lattice().dx();
        let off = u.box_offset();
        let index = |j: usize, x: f64| (((x - off[j]) / dx).round() as i64).rem_euclid(shape[j] as i64) as usize;
        if self.x1.is_empty() {
            self.x1 = (0..shape[0]).map(|i| off[0] + i as f64 * dx).collect();
            if shape.len() > 1 {
                self.x2 = (0..shape[1]).map(|i| off[1] + i as f64 * dx).collect();
            }
        }
        self.times.push(u.time);
        if shape.len() == 1 {
            self.along_x1.push(u.values.iter().map(|z| z.norm()).collect());
            return;
        }
        let j2 = index(1, center[1]);
        self.along_x1.push((0..shape[0]).map(|i| u.values[i * shape[1] + j2].norm()).collect());
        let i1 = index(0, center[0]);
        self.along_x2.push((0..shape[1]).map(|j| u.values[i1 * shape[1] + j].norm()).collect());
    }
}

/// `|u|` on a decimated grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    /// Spacing of the decimated grid.
    pub dx: f64,
    pub offset: Vec<f64>,
    pub shape: Vec<usize>,
    pub box_lengths: Vec<f64>,
    pub values: Vec<f64>,
}

/// Points kept per axis in snapshots, at most.
pub const SNAPSHOT_POINTS: usize = 256;

impl Snapshot {
    pub fn capture(u: &ComplexField, max_points: usize) -> Self {
        let shape = u.shape();
        let stride = shape.iter().map(|n| n.div_ceil(max_points.max(1))).max().unwrap_or(1);
        let dec: Vec<usize> = shape.iter().map(|n| n.div_ceil(stride)).collect();
        let dx = u.lattice().dx();
        let total: usize = dec.iter().product();
        let values = (0..total)
            .map(|flat| {
                let mut rem = flat;
                let mut src = 0;
                for j in (0..dec.len()).rev() {
                    let i = rem % dec[j];
                    rem /= dec[j];
                    let stride_j: usize = shape[j + 1..].iter().product();
                    src += i * stride * stride_j;
                }
                u.values[src].norm()
            })
            .collect();
        Self {
            time: u.time,
            dx: dx * stride as f64,
            offset: u.box_offset().to_vec(),
            shape: dec,
            box_lengths: shape.iter().map(|n| *n as f64 * dx).collect(),
            values,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub eps: f64,
    pub geometry: BoxGeometry,
    pub grid_points: usize,
    pub dt: f64,
    pub t_end: f64,
    pub wall_seconds: f64,
    pub series: ErrorSeries,
    pub slices: Slices,
    pub snapshots: Vec<Snapshot>,
    pub failure: Option<String>,
}

impl RunResult {
    pub fn max_error(&self) -> Option<f64> {
        (self.failure.is_none() && !self.series.times.is_empty()).then(|| self.series.max_error())
    }
}

/// One GP simulation from `u(0) = u_app(0)`; `slice_every` record points
/// (0 disables) also capture axis slices.
pub fn run_single(cfg: &StudyConfig, setup: &StudySetup, eps: f64, allow_large: bool, slice_every: usize) -> Result<RunResult> {
    let start = Instant::now();
    let t_end = snap_to_steps(cfg.t_end(eps), cfg.discretization.dt);
    let p = cfg.discretization.cell_points;
    let geometry = box_geometry(&cfg.box_policy, eps, &setup.params.v_g, t_end);
    let grid_points = geometry.num_points(p);
    if grid_points > LARGE_GRID && !allow_large {
        return Err(Error::Config(format!(
            "eps={eps} needs {grid_points} grid points; rerun with --allow-large"
        )));
    }
    let lattice = geometry.lattice(p)?;
    let system = GpSystem::new(lattice.clone(), &cfg.potential()?, &cfg.sigma()?)?;
    let ws = setup.wavepacket(eps, geometry.center.clone())?;
    let grid = AnsatzGrid::new(&ws, &lattice, &geometry.offset)?;
    let u0 = grid.field(0.0)?;
    let stepper_cfg = StepperConfig { dt: cfg.discretization.dt, t_end, record_every: cfg.discretization.record_every };
    let n = stepper_cfg.num_steps()?;
    log::info!(
        "eps={eps}: {} cells ({grid_points} points), {n} steps of dt={}",
        geometry.cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("x"),
        stepper_cfg.dt
    );
    let mut series = ErrorSeries::default();
    let mut slices = Slices::default();
    let mut snapshots = Vec::new();
    let mut records = 0usize;
    let stepper = Stepper::new(&system, stepper_cfg.dt);
    let mut u = u0;
    let outcome = stepper.evolve(&mut u, n, stepper_cfg.record_every, |u, _step| {
        let err = sup_error(u, &grid)?;
        series.push(u.time, err, u.mass(), u.peak_position());
        if slice_every > 0 && (records % slice_every == 0 || (u.time - t_end).abs() < 1e-9) {
            slices.capture(u, &ws.envelope_center(u.time));
            snapshots.push(Snapshot::capture(u, SNAPSHOT_POINTS));
        }
        records += 1;
        Ok(())
    });
    let failure = match outcome {
        Ok(()) => None,
        Err(e @ Error::NonFinite { .. }) => {
            log::warn!("eps={eps}: {e}");
            Some(e.to_string())
        }
        Err(e) => return Err(e),
    };
    Ok(RunResult {
        eps,
        geometry,
        grid_points,
        dt: stepper_cfg.dt,
        t_end,
        wall_seconds: start.elapsed().as_secs_f64(),
        series,
        slices,
        snapshots,
        failure,
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub eps_list: Vec<f64>,
    /// Max over recorded times, `None` for failed runs.
    pub max_error: Vec<Option<f64>>,
    pub final_error: Vec<Option<f64>>,
    pub fit: Option<SlopeFit>,
    pub params: EffectiveNlsParams,
    pub runs: Vec<RunResult>,
}

impl ConvergenceReport {
    pub fn fitted_slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Runs every configured `ε` (concurrently) and fits the error slope.
pub fn run_convergence(cfg: &StudyConfig, allow_large: bool) -> Result<ConvergenceReport> {
    if cfg.eps_list.is_empty() {
        return Err(Error::Config("study.eps is empty".into()));
    }
    let setup = StudySetup::new(cfg)?;
    // refuse oversized runs before any work starts
    for &eps in &cfg.eps_list {
        let t_end = snap_to_steps(cfg.t_end(eps), cfg.discretization.dt);
        let g = box_geometry(&cfg.box_policy, eps, &setup.params.v_g, t_end);
        let points = g.num_points(cfg.discretization.cell_points);
        if points > LARGE_GRID && !allow_large {
            return Err(Error::Config(format!(
                "eps={eps} needs {points} grid points; rerun with --allow-large"
            )));
        }
    }
    let runs = cfg
        .eps_list
        .par_iter()
        .map(|&eps| run_single(cfg, &setup, eps, allow_large, 0))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(cfg.eps_list.clone(), setup.params, runs))
}

pub fn summarize(eps_list: Vec<f64>, params: EffectiveNlsParams, runs: Vec<RunResult>) -> ConvergenceReport {
    let max_error: Vec<Option<f64>> = runs.iter().map(RunResult::max_error).collect();
    let final_error = runs
        .iter()
        .map(|r| if r.failure.is_none() { r.series.final_error() } else { None })
        .collect();
    let (e, m): (Vec<f64>, Vec<f64>) = eps_list
        .iter()
        .zip(&max_error)
        .filter_map(|(e, m)| m.map(|m| (*e, m)))
        .unzip();
    let fit = fit_slope(&e, &m).ok();
    ConvergenceReport { eps_list, max_error, final_error, fit, params, runs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_numbers() {
        assert_eq!(next_smooth(7), 8);
        assert_eq!(next_smooth(46), 48);
        assert_eq!(next_smooth(86), 90);
        assert_eq!(next_smooth(1), 1);
    }

    #[test]
    fn exact_power_laws() {
        let eps = [0.3, 0.2, 0.1, 0.05];
        let e2: Vec<f64> = eps.iter().map(|e| e * e).collect();
        assert!((fit_slope(&eps, &e2).unwrap().slope - 2.0).abs() < 1e-12);
        let e225: Vec<f64> = eps.iter().map(|e| 0.7 * e.powf(2.25)).collect();
        let fit = fit_slope(&eps, &e225).unwrap();
        assert!((fit.slope - 2.25).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(fit_slope(&[0.1, 0.2], &[0.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(fit_slope(&[0.1], &[1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn scaled_box_is_commensurate_and_covers_travel() {
        let g = box_geometry(&BoxPolicy::Scaled { factor: 8.0 }, 0.1, &[2.5, 0.0], 100.0);
        let half1 = g.cells[0] as f64 * PI;
        assert!(half1 >= 125.0 + 80.0);
        assert!(g.offset.iter().all(|o| (o / TAU).fract() == 0.0));
        assert_eq!(g.center, vec![-125.0, 0.0]);
    }
}
