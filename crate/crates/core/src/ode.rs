//! Adaptive Dormand–Prince 5(4) integrator for small autonomous-in-form
//! systems `y' = f(r, y)`, with an optional stop predicate checked after
//! every accepted step.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Reached,
    Stopped,
}

#[derive(Debug, Clone)]
pub struct Integrator<const N: usize> {
    pub tol: Tolerances,
    /// Step size carried between calls.
    pub h: f64,
}

impl<const N: usize> Integrator<N> {
    pub fn new(tol: Tolerances, h: f64) -> Self {
        Self { tol, h }
    }

    /// Advances `(r, y)` towards `r_end`; stops early, after the first
    /// accepted step on which `stop(r, y)` holds.
    pub fn integrate<F, S>(
        &mut self,
        f: &F,
        r: &mut f64,
        y: &mut [f64; N],
        r_end: f64,
        mut stop: S,
    ) -> Result<Outcome>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        S: FnMut(f64, &[f64; N]) -> bool,
    {
        let mut k = [[0.0; N]; 7];
        k[0] = f(*r, y);
        for _ in 0..MAX_STEPS {
            let remaining = r_end - *r;
            if remaining <= 1e-14 * r_end.abs().max(1.0) {
                return Ok(Outcome::Reached);
            }
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            for s in 1..7 {
                let mut ys = *y;
                for (i, v) in ys.iter_mut().enumerate() {
                    for (j, kj) in k.iter().enumerate().take(s) {
                        *v += h * A[s][j] * kj[i];
                    }
                }
                k[s] = f(*r + C[s] * h, &ys);
            }
            let mut y_new = *y;
            for (i, v) in y_new.iter_mut().enumerate() {
                for (j, kj) in k.iter().enumerate().take(6) {
                    *v += h * A[6][j] * kj[i];
                }
            }
            let mut err = 0.0;
            for i in 0..N {
                let e: f64 = (0..7).map(|j| h * E[j] * k[j][i]).sum();
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
                return Err(Error::Stiffness(format!("non-finite state at r={}", *r)));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                *r = if last { r_end } else { *r + h };
                *y = y_new;
                // first-same-as-last
                k[0] = k[6];
                if !last {
                    self.h = h * factor;
                }
                if stop(*r, y) {
                    return Ok(Outcome::Stopped);
                }
            } else {
                self.h = h * factor;
            }
            if self.h < 1e-14 * r.abs().max(1.0) {
                return Err(Error::Stiffness(format!("step size underflow at r={}", *r)));
            }
        }
        Err(Error::Stiffness(format!("step budget exhausted at r={}", *r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_r: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut it = Integrator::new(Tolerances { rtol: 1e-12, atol: 1e-14 }, 0.01);
        let (mut r, mut y) = (0.0, [1.0, 0.0]);
        let out = it.integrate(&f, &mut r, &mut y, 10.0, |_, _| false).unwrap();
        assert_eq!(out, Outcome::Reached);
        assert_eq!(r, 10.0);
        assert!((y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((y[1] + 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn stop_predicate() {
        let f = |_r: f64, _y: &[f64; 1]| [-1.0];
        let mut it = Integrator::new(Tolerances { rtol: 1e-10, atol: 1e-12 }, 0.05);
        let (mut r, mut y) = (0.0, [1.0]);
        let out = it.integrate(&f, &mut r, &mut y, 5.0, |_, y| y[0] < 0.0).unwrap();
        assert_eq!(out, Outcome::Stopped);
        assert!(y[0] < 0.0 && r > 1.0);
    }
}
