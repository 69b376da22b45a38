//! Multi-dimensional complex FFT on row-major buffers.
//!
//! Forward transforms are unnormalized; [`FftNd::inverse`] divides by the
//! total number of points so that `inverse(forward(u)) == u`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

pub struct FftNd {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    backward: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("shape", &self.shape).finish()
    }
}

impl FftNd {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let backward = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self { shape: shape.to_vec(), forward, backward }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `û_j = Σ_x u_x e^{-2πi j·x/n}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized inverse: `Σ_j û_j e^{+2πi j·x/n}`.
    pub fn backward(&self, data: &mut [Complex64]) {
        self.run(data, &self.backward);
    }

    /// Normalized inverse of [`FftNd::forward`].
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.backward(data);
        let scale = 1.0 / self.len() as f64;
        data.par_iter_mut().for_each(|z| *z *= scale);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len(), "buffer does not match FFT shape");
        let nd = self.shape.len();
        for axis in 0..nd {
            let n = self.shape[axis];
            if n == 1 {
                continue;
            }
            let inner: usize = self.shape[axis + 1..].iter().product();
            let plan = &plans[axis];
            if inner == 1 {
                // contiguous lanes
                data.par_chunks_mut(n * 64).for_each(|block| {
                    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                    plan.process_with_scratch(block, &mut scratch);
                });
            } else {
                let outer: usize = self.shape[..axis].iter().product();
                for o in 0..outer {
                    let slab = &mut data[o * n * inner..(o + 1) * n * inner];
                    transform_strided(slab, n, inner, plan.as_ref());
                }
            }
        }
    }
}

/// Transforms the `inner` interleaved lanes of a `[n][inner]` slab by
/// transposing into contiguous lanes and back.
fn transform_strided(slab: &mut [Complex64], n: usize, inner: usize, plan: &dyn Fft<f64>) {
    let mut lanes = vec![Complex64::default(); n * inner];
    lanes.par_chunks_mut(n).enumerate().for_each(|(i, lane)| {
        for (j, z) in lane.iter_mut().enumerate() {
            *z = slab[j * inner + i];
        }
    });
    lanes.par_chunks_mut(n * 16).for_each(|block| {
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(block, &mut scratch);
    });
    slab.par_chunks_mut(inner).enumerate().for_each(|(j, row)| {
        for (i, z) in row.iter_mut().enumerate() {
            *z = lanes[i * n + j];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn naive_dft(data: &[Complex64], shape: &[usize]) -> Vec<Complex64> {
        let total: usize = shape.iter().product();
        let idx = |flat: usize| crate::lattice::unravel(flat, shape);
        (0..total)
            .map(|j| {
                let jj = idx(j);
                (0..total)
                    .map(|x| {
                        let xx = idx(x);
                        let phase: f64 = (0..shape.len())
                            .map(|a| (jj[a] * xx[a]) as f64 / shape[a] as f64)
                            .sum();
                        data[x] * Complex64::from_polar(1.0, -TAU * phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_2d() {
        let shape = [6, 10];
        let data: Vec<Complex64> = (0..60)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut fast = data.clone();
        FftNd::new(&shape).forward(&mut fast);
        let slow = naive_dft(&data, &shape);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let shape = [12, 5];
        let data: Vec<Complex64> =
            (0..60).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let plan = FftNd::new(&shape);
        let mut buf = data.clone();
        plan.forward(&mut buf);
        plan.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&data) {
            assert!((a - b).norm() < 1e-11);
        }
    }
}
