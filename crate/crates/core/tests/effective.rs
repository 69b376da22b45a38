use std::f64::consts::TAU;

use bloch_envelope::bands::{solve_bands, BlochOperator, BlochOperatorSpec, Sector};
use bloch_envelope::coefficients::PeriodicCoefficients;
use bloch_envelope::effective::{effective_params, nu_gp, nu_nlw, Nonlinearity};
use bloch_envelope::Error;
use proptest::prelude::*;

// tests/oracles/bands_oracle.py
const NUMPY_NU: f64 = 0.04904738179528848;

fn carrier_op() -> BlochOperator {
    let spec = BlochOperatorSpec::schrodinger(PeriodicCoefficients::cosprod(2, 1.0, 0.0), 12)
        .with_sector(Sector { weights: vec![1, 1], modulus: 2, residue: 1 });
    BlochOperator::new(spec).unwrap()
}

#[test]
fn cubic_coefficient_at_carrier() {
    let sigma = PeriodicCoefficients::cosprod(2, 1.0, -2.0);
    let (params, mode) = effective_params(&carrier_op(), &[0.4, 0.0], 4, &Nonlinearity::Gp { sigma }).unwrap();
    assert!((params.nu - 0.04905).abs() < 5e-4);
    assert!((params.nu - NUMPY_NU).abs() < 1e-12);
    assert!((params.omega0 - 2.075).abs() < 5e-3);
    assert!(params.is_focusing());
    assert!((mode.l2_norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn constant_sigma_closed_form() {
    for d in 1..=2 {
        for k in [0.0, 0.3] {
            let op = BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::constant(d, -0.4), 3)).unwrap();
            let p = solve_bands(&op, &vec![k; d], 1).unwrap().pop().unwrap();
            let nu = nu_gp(&PeriodicCoefficients::constant(d, 2.5), &p).unwrap();
            assert!((nu + 2.5 * TAU.powi(-(d as i32))).abs() < 1e-10);
        }
    }
}

#[test]
fn mismatched_nonlinearity_rejected() {
    let chi3 = PeriodicCoefficients::constant(2, 1.0);
    let err = effective_params(&carrier_op(), &[0.4, 0.0], 4, &Nonlinearity::Nlw { chi3 }).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn nlw_constant_coefficients() {
    // p = (2π)^{-1/2} e^{i0x}, ∫χ₃|p|⁴ = χ₃/(2π)
    let one = PeriodicCoefficients::constant(1, 1.0);
    let op = BlochOperator::new(BlochOperatorSpec::wave(one.clone(), PeriodicCoefficients::constant(1, 1.0), 4)).unwrap();
    let p = solve_bands(&op, &[0.3], 1).unwrap().pop().unwrap();
    let omega = (0.09f64 + 1.0).sqrt();
    let nu = nu_nlw(&one, &PeriodicCoefficients::constant(1, 2.0), &p, omega).unwrap();
    assert!((nu + 1.5 / omega * 2.0 / TAU).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    /// `ν` depends on `|p|` only.
    #[test]
    fn phase_invariance(theta in 0.0f64..TAU, k in -0.5f64..0.5) {
        let op = BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::cosprod(1, 0.8, 0.0), 8)).unwrap();
        let p = solve_bands(&op, &[k], 1).unwrap().pop().unwrap();
        let sigma = PeriodicCoefficients::cosprod(1, 0.5, -1.0);
        let a = nu_gp(&sigma, &p).unwrap();
        let b = nu_gp(&sigma, &p.rephased(theta)).unwrap();
        prop_assert!((a - b).abs() < 1e-13);
    }

    /// Linear in `σ`.
    #[test]
    fn linear_in_sigma(c in -3.0f64..3.0, k in -0.5f64..0.5) {
        let op = BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::cosprod(1, 0.8, 0.0), 8)).unwrap();
        let p = solve_bands(&op, &[k], 2).unwrap().pop().unwrap();
        let a = nu_gp(&PeriodicCoefficients::cosprod(1, c, -c), &p).unwrap();
        let b = nu_gp(&PeriodicCoefficients::cosprod(1, 1.0, -1.0), &p).unwrap();
        prop_assert!((a - c * b).abs() < 1e-12);
    }
}
