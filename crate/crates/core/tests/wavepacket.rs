mod common;

use std::f64::consts::TAU;

use bloch_envelope::bands::{solve_bands, BlochMode, BlochOperator, BlochOperatorSpec};
use bloch_envelope::coefficients::PeriodicCoefficients;
use bloch_envelope::dynamics::GpSystem;
use bloch_envelope::effective::EffectiveNlsParams;
use bloch_envelope::lattice::Lattice;
use bloch_envelope::study::{box_geometry, fit_slope, BoxPolicy, StudyConfig, StudySetup};
use bloch_envelope::townes::{townes_shoot, RadialProfile, ShootingOptions};
use bloch_envelope::wavepacket::{assemble_ansatz, gp_residual, sup_error, AnsatzGrid, ErrorSeries, WavepacketSpec};
use bloch_envelope::Error;
use common::GP_CONFIG;
use num_complex::Complex64;

fn constant_mode(k0: &[f64], c: f64) -> BlochMode {
    let op = BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::constant(k0.len(), c), 2)).unwrap();
    solve_bands(&op, k0, 1).unwrap().pop().unwrap()
}

fn isotropic_params(k0: &[f64], omega0: f64, nu: f64) -> EffectiveNlsParams {
    let d = k0.len();
    EffectiveNlsParams {
        omega0,
        v_g: k0.iter().map(|k| 2.0 * k).collect(),
        hessian: (0..d).map(|i| (0..d).map(|j| if i == j { 2.0 } else { 0.0 }).collect()).collect(),
        nu,
        isotropy_defect: 0.0,
        v_g_hellmann_feynman: k0.iter().map(|k| 2.0 * k).collect(),
        k0: k0.to_vec(),
        band: 1,
    }
}

fn flat_profile(value: f64, nu: f64, dim: usize, r_max: f64) -> RadialProfile {
    let n = 64;
    let r_grid: Vec<f64> = (0..n).map(|i| i as f64 * r_max / (n - 1) as f64).collect();
    RadialProfile {
        values: vec![value; n],
        derivatives: vec![0.0; n],
        r_grid,
        r0: value,
        alpha: 2.0,
        nu,
        dim,
        r_match: r_max,
        iterations: 0,
        bracket_width: 0.0,
    }
}

/// With `σ ≡ σ0`, `V ≡ c`, constant `p` and `R ≡ ν^{-1/2}` the ansatz solves
/// the GP equation exactly.
#[test]
fn residual_vanishes_for_exact_plane_wave() {
    let (c, sigma0) = (0.7, -2.0);
    let lattice = Lattice::cubic(2, 8, 4).unwrap();
    let k0 = [0.25, -0.25];
    let mode = constant_mode(&k0, c);
    let nu = -sigma0 / TAU.powi(2);
    let omega0 = k0.iter().map(|k| k * k).sum::<f64>() + c;
    let params = isotropic_params(&k0, omega0, nu);
    let ws = WavepacketSpec::new(0.3, params, flat_profile(nu.powf(-0.5), nu, 2, 1e3), mode, vec![1.0, -2.0]).unwrap();
    let system = GpSystem::new(lattice, &PeriodicCoefficients::constant(2, c), &PeriodicCoefficients::constant(2, sigma0)).unwrap();
    for t in [0.0, 0.37, 5.0] {
        let res = gp_residual(&ws, &system, &[0.0, 0.0], t).unwrap();
        assert!(res < 1e-13, "t={t}: {res}");
    }
}

#[test]
fn constant_carrier_gives_scaled_profile() {
    let lattice = Lattice::cubic(2, 8, 6).unwrap();
    let k0 = [0.0, 0.0];
    let profile = townes_shoot(2.0, 1.0, 2, &ShootingOptions::default()).unwrap();
    let mode = constant_mode(&k0, 0.0);
    let ws = WavepacketSpec::new(0.2, isotropic_params(&k0, 0.0, 1.0), profile.clone(), mode, vec![0.5, 0.25]).unwrap();
    let offset = vec![-3.0 * TAU, -3.0 * TAU];
    let t = 1.3;
    let u = assemble_ansatz(&ws, &lattice, &offset, t).unwrap();
    for flat in (0..u.values.len()).step_by(37) {
        let x = u.coordinates(flat);
        let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.25).powi(2)).sqrt();
        let expect = 0.2 * profile.eval(0.2 * r).unwrap() / TAU;
        assert!((u.values[flat].norm() - expect).abs() < 1e-14);
    }
}

#[test]
fn sup_error_of_ansatz_is_zero_and_detects_a_point() {
    let lattice = Lattice::cubic(2, 8, 4).unwrap();
    let k0 = [0.25, 0.0];
    let ws = WavepacketSpec::new(
        0.3,
        isotropic_params(&k0, 0.0625, 1.0),
        townes_shoot(2.0, 1.0, 2, &ShootingOptions::default()).unwrap(),
        constant_mode(&k0, 0.0),
        vec![0.0, 0.0],
    )
    .unwrap();
    let offset = [-2.0 * TAU, -2.0 * TAU];
    let grid = AnsatzGrid::new(&ws, &lattice, &offset).unwrap();
    let mut u = grid.field(0.8).unwrap();
    assert_eq!(sup_error(&u, &grid).unwrap(), 0.0);
    u.values[17] += Complex64::new(0.0, 3e-4);
    assert!((sup_error(&u, &grid).unwrap() - 3e-4).abs() < 1e-15);
}

#[test]
fn inconsistent_profile_rejected() {
    let k0 = [0.1];
    let profile = townes_shoot(1.0, 1.0, 1, &ShootingOptions::default()).unwrap();
    let err = WavepacketSpec::new(0.1, isotropic_params(&k0, 0.01, 1.0), profile, constant_mode(&k0, 0.0), vec![0.0]).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    let profile = townes_shoot(2.0, 1.0, 1, &ShootingOptions::default()).unwrap();
    let err = WavepacketSpec::new(1.5, isotropic_params(&k0, 0.01, 1.0), profile, constant_mode(&k0, 0.0), vec![0.0]).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn misaligned_box_rejected() {
    let k0 = [0.1];
    let ws = WavepacketSpec::new(
        0.2,
        isotropic_params(&k0, 0.01, 1.0),
        townes_shoot(2.0, 1.0, 1, &ShootingOptions::default()).unwrap(),
        constant_mode(&k0, 0.0),
        vec![0.0],
    )
    .unwrap();
    let lattice = Lattice::cubic(1, 8, 4).unwrap();
    assert!(AnsatzGrid::new(&ws, &lattice, &[0.5]).is_err());
}

#[test]
fn error_series_csv_columns() {
    let mut s = ErrorSeries::default();
    s.push(0.0, 0.0, 1.0, vec![0.0, 0.5]);
    s.push(0.5, 1e-3, 1.0, vec![1.0, 0.5]);
    let csv = s.to_csv();
    assert_eq!(csv.lines().next().unwrap(), "t,sup_error,mass,peak_x1,peak_x2");
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(s.max_error(), 1e-3);
}

/// Sup-norm residual of the carrier-band ansatz decreases like ε².
#[test]
fn residual_slope_on_carrier() {
    let cfg = StudyConfig::from_toml(GP_CONFIG).unwrap();
    let setup = StudySetup::new(&cfg).unwrap();
    let eps = [0.3, 0.2, 0.1];
    let res: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let g = box_geometry(&BoxPolicy::Scaled { factor: 12.0 }, e, &[0.0, 0.0], 0.0);
            let lattice = g.lattice(16).unwrap();
            let system = GpSystem::new(lattice, &cfg.potential().unwrap(), &cfg.sigma().unwrap()).unwrap();
            let ws = setup.wavepacket(e, g.center.clone()).unwrap();
            gp_residual(&ws, &system, &g.offset, 0.0).unwrap()
        })
        .collect();
    let fit = fit_slope(&eps, &res).unwrap();
    assert!(fit.slope >= 1.9, "slope {} from {res:?}", fit.slope);
}

/// One carrier period later, in a frame moved by `v_g` times the period, the
/// ansatz only changes by a global phase.
#[test]
fn residual_periodic_in_carrier_time() {
    let cfg = StudyConfig::from_toml(GP_CONFIG).unwrap();
    let setup = StudySetup::new(&cfg).unwrap();
    let eps = 0.3;
    let g = box_geometry(&BoxPolicy::Scaled { factor: 8.0 }, eps, &[0.0, 0.0], 0.0);
    let system = GpSystem::new(g.lattice(16).unwrap(), &cfg.potential().unwrap(), &cfg.sigma().unwrap()).unwrap();
    let period = TAU / setup.params.omega0;
    let a = gp_residual(&setup.wavepacket(eps, vec![0.0, 0.0]).unwrap(), &system, &g.offset, 0.0).unwrap();
    let shifted: Vec<f64> = setup.params.v_g.iter().map(|v| -v * period).collect();
    let b = gp_residual(&setup.wavepacket(eps, shifted).unwrap(), &system, &g.offset, period).unwrap();
    assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
}
