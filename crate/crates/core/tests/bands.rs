use bloch_envelope::bands::{
    band_gradient, band_hessian, band_structure, check_asymptotics, eigenvalues, full_band_index,
    k_path, solve_bands, BlochOperator, BlochOperatorSpec, FdOptions, Sector,
};
use bloch_envelope::coefficients::PeriodicCoefficients;
use bloch_envelope::Error;
use proptest::prelude::*;

fn cosprod_op(n: usize) -> BlochOperator {
    BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::cosprod(2, 1.0, 0.0), n)).unwrap()
}

fn odd_sector() -> Sector {
    Sector { weights: vec![1, 1], modulus: 2, residue: 1 }
}

// tests/oracles/bands_oracle.py, N = 12
const NUMPY_BANDS: [f64; 10] = [
    0.017294715929570305,
    0.17975275592671403,
    1.1273665663469483,
    1.1273665663475203,
    1.3254749239753651,
    1.32547492397573,
    2.0749803767681714,
    2.6336551320219628,
    2.9019559935902874,
    2.901955993590463,
];

#[test]
fn full_cell_bands_match_numpy() {
    let vals = eigenvalues(&cosprod_op(12), &[0.4, 0.0], 10).unwrap();
    for (a, b) in vals.iter().zip(NUMPY_BANDS) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn carrier_band_in_odd_sector() {
    let sector = BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::cosprod(2, 1.0, 0.0), 12).with_sector(odd_sector())).unwrap();
    let lam = eigenvalues(&sector, &[0.4, 0.0], 4).unwrap()[3];
    assert!((lam - 2.075).abs() < 0.005);
    assert!((lam - NUMPY_BANDS[6]).abs() < 1e-9);
    assert_eq!(full_band_index(&sector, &cosprod_op(12), &[0.4, 0.0], 4).unwrap(), 7);
}

// scipy.special.mathieu_a / mathieu_b with q = 2, divided by 4
const MATHIEU_K0: [f64; 5] = [-0.37848922126413004, 0.9180581766242977, 1.2931662833395736, 4.031921988130657, 4.035300946396234];
const MATHIEU_K_HALF: [f64; 4] = [-0.34766912530633076, 0.5947999701221716, 2.28515693444161, 2.342580620905276];

#[test]
fn one_dimensional_mathieu() {
    let op = BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::cosprod(1, 1.0, 0.0), 20)).unwrap();
    let v0 = eigenvalues(&op, &[0.0], 5).unwrap();
    for (a, b) in v0.iter().zip(MATHIEU_K0) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    let vh = eigenvalues(&op, &[0.5], 4).unwrap();
    for (a, b) in vh.iter().zip(MATHIEU_K_HALF) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

/// Free bands are the sorted `|k + m|²`.
#[test]
fn free_bands_by_enumeration() {
    let op = BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::constant(2, 0.3), 6)).unwrap();
    let k = [0.17, -0.31];
    let mut brute: Vec<f64> = (-6i64..=6)
        .flat_map(|a| (-6i64..=6).map(move |b| (a, b)))
        .map(|(a, b)| (k[0] + a as f64).powi(2) + (k[1] + b as f64).powi(2) + 0.3)
        .collect();
    brute.sort_by(f64::total_cmp);
    let vals = eigenvalues(&op, &k, 12).unwrap();
    for (a, b) in vals.iter().zip(&brute) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn group_velocity_and_hessian_at_carrier() {
    let op = BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::cosprod(2, 1.0, 0.0), 12).with_sector(odd_sector())).unwrap();
    let g = band_gradient(&op, &[0.4, 0.0], 4, FdOptions::default()).unwrap();
    assert!((g.fd[0] - 2.5083).abs() < 0.005 && g.fd[1].abs() < 0.005);
    assert!(g.disagreement() < 1e-6);
    let h = band_hessian(&op, &[0.4, 0.0], 4, FdOptions::default()).unwrap();
    assert!(h.asymmetry() < 1e-6);
    assert!(h.isotropy_defect() < 1e-3 * h.trace());
}

#[test]
fn degenerate_band_rejected() {
    // bands 3 and 4 of the full cell coincide at (0.4, 0)
    let err = band_gradient(&cosprod_op(8), &[0.4, 0.0], 3, FdOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Simpleness { .. }), "{err}");
}

#[test]
fn weyl_asymptotics_bounded() {
    let op = BlochOperator::new(BlochOperatorSpec::schrodinger(PeriodicCoefficients::cosprod(2, 1.0, 0.0), 8)).unwrap();
    let rep = check_asymptotics(&op, &[0.1, 0.2], 60).unwrap();
    assert!(rep.bounded(), "{rep:?}");
}

#[test]
fn path_table_shape() {
    let (ks, path) = k_path("GXMG", 2, 5).unwrap();
    let table = band_structure(&cosprod_op(4), &ks, 3).unwrap().with_path(path);
    let csv = table.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k_1,k_2,lambda_1,lambda_2,lambda_3");
    assert_eq!(lines.count(), ks.len());
    assert!(table.to_svg("bands").starts_with("<svg"));
}

fn small_op() -> BlochOperator {
    let v = PeriodicCoefficients::from_modes(
        2,
        &[
            (vec![1, 0], num_complex::Complex64::new(0.3, 0.2)),
            (vec![-1, 0], num_complex::Complex64::new(0.3, -0.2)),
            (vec![1, 1], num_complex::Complex64::new(-0.25, 0.0)),
            (vec![-1, -1], num_complex::Complex64::new(-0.25, 0.0)),
            (vec![0, 0], num_complex::Complex64::new(0.5, 0.0)),
        ],
    )
    .unwrap();
    BlochOperator::new(BlochOperatorSpec::schrodinger(v, 5)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bands_are_periodic_and_ordered(k1 in -0.5f64..0.5, k2 in -0.5f64..0.5, s1 in -2i64..=2, s2 in -2i64..=2) {
        let op = small_op();
        let a = eigenvalues(&op, &[k1, k2], 8).unwrap();
        let b = eigenvalues(&op, &[k1 + s1 as f64, k2 + s2 as f64], 8).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        prop_assert!(a.windows(2).all(|w| w[0] <= w[1]));
    }

    /// Real potentials give `λ(-k) = λ(k)`.
    #[test]
    fn time_reversal(k1 in -0.5f64..0.5, k2 in -0.5f64..0.5) {
        let op = small_op();
        let a = eigenvalues(&op, &[k1, k2], 8).unwrap();
        let b = eigenvalues(&op, &[-k1, -k2], 8).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    /// Modes are normalized and satisfy `λ = ⟨p, L p⟩` evaluated in Fourier space.
    #[test]
    fn rayleigh_quotient(k1 in -0.5f64..0.5, k2 in -0.5f64..0.5) {
        let op = cosprod_op(6);
        let modes = solve_bands(&op, &[k1, k2], 4).unwrap();
        for mode in &modes {
            prop_assert!((mode.l2_norm_sqr() - 1.0).abs() < 1e-10);
            // ⟨p, (|∇ + ik|² + V) p⟩ with V̂ = 1/4 on (±1, ±1)
            let mut q = 0.0;
            for (m, c) in mode.modes.iter().zip(&mode.coeffs) {
                let kin = (mode.k[0] + m[0] as f64).powi(2) + (mode.k[1] + m[1] as f64).powi(2);
                q += kin * c.norm_sqr();
                for s in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
                    let n = [m[0] + s[0], m[1] + s[1]];
                    q += 0.25 * (c.conj() * mode.coefficient(&n)).re;
                }
            }
            prop_assert!((q - mode.lam).abs() < 1e-10, "{} vs {}", q, mode.lam);
        }
    }
}
