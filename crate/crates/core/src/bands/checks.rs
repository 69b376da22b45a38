use serde::Serialize;

use super::derivatives::frequency;
use super::operator::{BlochOperator, OperatorKind};
use super::solve::eigenvalues;
use crate::error::{Error, Result};

pub const RESONANCE_TOL: f64 = 1e-8;
const HARMONICS: [i64; 4] = [-3, -1, 1, 3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    /// `min λ_n / n^{2/d}` over the tail range.
    pub c1: f64,
    /// `max λ_n / n^{2/d}` over the tail range.
    pub c2: f64,
    /// First band index of the tail range.
    pub tail_start: usize,
    /// `λ_n / n^{2/d}` for `n = 1..=n_max`.
    pub ratios: Vec<f64>,
}

impl AsymptoticsReport {
    pub fn bounded(&self) -> bool {
        self.c1 > 0.0 && self.c2.is_finite() && self.c2 / self.c1 < 10.0
    }
}

/// Empirical Weyl-type bounds `C1 n^{2/d} ≤ λ_n(k) ≤ C2 n^{2/d}` over
/// `n ∈ [max(2, n_max/2), n_max]`.
pub fn check_asymptotics(op: &BlochOperator, k: &[f64], n_max: usize) -> Result<AsymptoticsReport> {
    let vals = eigenvalues(op, k, n_max)?;
    let expo = 2.0 / op.dim() as f64;
    let ratios: Vec<f64> =
        vals.iter().enumerate().map(|(i, v)| v / ((i + 1) as f64).powf(expo)).collect();
    let tail_start = (n_max / 2).max(2).min(n_max);
    let tail = &ratios[tail_start - 1..];
    let c1 = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let c2 = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(AsymptoticsReport { c1, c2, tail_start, ratios })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonresonanceReport {
    pub omega0: f64,
    pub margin: f64,
    /// Signed band index `n` and harmonic `j` attaining the margin.
    pub argmin: (i64, i64),
    /// `min_j ω_{n_scan}(j k0) - 3ω₀`; every unscanned pair is at least this far.
    pub tail_bound: f64,
    /// Whether the finite scan provably attains the infimum over all `n`.
    pub tail_guaranteed: bool,
}

/// Scans `|j ω_{n0}(k0) - ω_n(j k0)|` over `0 < |n| ≤ n_scan`, `j ∈ {±1, ±3}`,
/// with `ω_{-n} = -ω_n`, skipping the carrier pairs `(n0, 1)` and `(-n0, -1)`.
///
/// The operator must span the full plane-wave space (no sector) so that band
/// indices are global.
pub fn check_nonresonance(
    op: &BlochOperator,
    k0: &[f64],
    n0: usize,
    n_scan: usize,
) -> Result<NonresonanceReport> {
    if op.kind() != OperatorKind::Wave {
        return Err(Error::Config("nonresonance check needs a wave-type operator".into()));
    }
    if op.spec().sector.is_some() {
        return Err(Error::Config("nonresonance check needs the full plane-wave space".into()));
    }
    if n0 == 0 || n0 > n_scan {
        return Err(Error::Config(format!("carrier band {n0} outside scan range 1..={n_scan}")));
    }
    let base = eigenvalues(op, k0, n_scan)?;
    let omega0 = frequency(op.kind(), base[n0 - 1], k0)?;

    let mut margin = f64::INFINITY;
    let mut argmin = (0, 0);
    let mut tail_bound = f64::INFINITY;
    for j in HARMONICS {
        let kj: Vec<f64> = k0.iter().map(|c| j as f64 * c).collect();
        let lams = eigenvalues(op, &kj, n_scan)?;
        let omegas: Vec<f64> = lams.iter().map(|&l| frequency(op.kind(), l, &kj)).collect::<Result<_>>()?;
        tail_bound = tail_bound.min(omegas[n_scan - 1] - 3.0 * omega0);
        for (i, &w) in omegas.iter().enumerate() {
            let n = (i + 1) as i64;
            for (signed, value) in [(n, w), (-n, -w)] {
                if (signed == n0 as i64 && j == 1) || (signed == -(n0 as i64) && j == -1) {
                    continue;
                }
                let dist = (j as f64 * omega0 - value).abs();
                if dist < margin {
                    margin = dist;
                    argmin = (signed, j);
                }
            }
        }
    }
    if margin < RESONANCE_TOL {
        return Err(Error::Resonance { n: argmin.0, j: argmin.1, margin });
    }
    Ok(NonresonanceReport {
        omega0,
        margin,
        argmin,
        tail_bound,
        tail_guaranteed: tail_bound >= margin,
    })
}

/// Global (1-based) index of band `n` of a sector operator within the full
/// spectrum of `full` at `k`.
pub fn full_band_index(sector_op: &BlochOperator, full: &BlochOperator, k: &[f64], n: usize) -> Result<usize> {
    let lam = eigenvalues(sector_op, k, n)?[n - 1];
    let count = full.size().min(4 * n + 8);
    let vals = eigenvalues(full, k, count)?;
    let (idx, _) = vals
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (v - lam).abs()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Ok(idx + 1)
}
