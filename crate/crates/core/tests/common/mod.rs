#![allow(dead_code)]

use std::f64::consts::TAU;

use bloch_envelope::field::ComplexField;
use bloch_envelope::lattice::{unravel, Lattice};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GP_CONFIG: &str = r#"
[model]
kind = "gp"
dim = 2

[coefficients]
potential = { builtin = "cosprod" }
sigma = { builtin = "cosprod", amplitude = 1.0, offset = -2.0 }

[carrier]
k0 = [0.4, 0.0]
band = 4
sector = { weights = [1, 1], modulus = 2, residue = 1 }

[discretization]
cell_points = 16
dt = 0.02
record_every = 25

[study]
eps = [0.3, 0.2, 0.1]
box_policy = "scaled"
t_end = "one_over_eps2"
"#;

pub fn random_field(lattice: &Lattice, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..lattice.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexField::new(lattice.clone(), vec![0.0; lattice.dim()], values).unwrap()
}

/// Smooth random field: a few low box harmonics with random amplitudes.
pub fn smooth_field(lattice: &Lattice, seed: u64, offset: Vec<f64>) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lengths = lattice.box_lengths();
    let waves: Vec<(Vec<f64>, Complex64)> = (0..6)
        .map(|_| {
            let xi = lengths.iter().map(|l| rng.gen_range(-3i64..=3) as f64 * TAU / l).collect();
            (xi, 0.15 * Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    ComplexField::from_fn_with_offset(lattice.clone(), offset, |x| {
        waves
            .iter()
            .map(|(xi, a)| a * Complex64::from_polar(1.0, xi.iter().zip(x).map(|(k, y)| k * y).sum()))
            .sum()
    })
    .unwrap()
}

/// Box-local coordinates of a flat index.
pub fn local_coords(lattice: &Lattice, flat: usize) -> Vec<f64> {
    unravel(flat, &lattice.box_shape()).iter().map(|i| *i as f64 * lattice.dx()).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
