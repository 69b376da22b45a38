use std::fmt::Write as _;

use rayon::prelude::*;

use super::operator::BlochOperator;
use super::solve::eigenvalues;
use crate::error::{Error, Result};
use crate::lattice::symmetry_point;
use crate::plot::{LinePlot, Series};

/// Eigenvalues `λ_n(k_i)`, `n = 1..n_max`, on a list of wavevectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BandTable {
    pub k_grid: Vec<Vec<f64>>,
    /// `bands[i][n]` is `λ_{n+1}(k_i)`.
    pub bands: Vec<Vec<f64>>,
    pub n_max: usize,
    /// Arc length along a path and labeled vertices, when built from one.
    pub path: Option<KPath>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KPath {
    pub distance: Vec<f64>,
    pub vertices: Vec<(f64, char)>,
}

/// Piecewise-linear path through named symmetry points (`"GXMG"`), with
/// `per_segment` samples per leg and the final vertex included once.
pub fn k_path(labels: &str, dim: usize, per_segment: usize) -> Result<(Vec<Vec<f64>>, KPath)> {
    let corners: Vec<(char, Vec<f64>)> = labels
        .chars()
        .map(|c| {
            symmetry_point(c, dim)
                .map(|p| (c.to_ascii_uppercase(), p))
                .ok_or_else(|| Error::Config(format!("unknown symmetry point '{c}' for d={dim}")))
        })
        .collect::<Result<_>>()?;
    if corners.len() < 2 || per_segment == 0 {
        return Err(Error::Config(format!("k-path '{labels}' needs at least two points")));
    }
    let mut ks = Vec::new();
    let mut distance = Vec::new();
    let mut vertices = vec![(0.0, corners[0].0)];
    let mut s = 0.0;
    for w in corners.windows(2) {
        let (a, b) = (&w[0].1, &w[1].1);
        let len: f64 = a.iter().zip(b).map(|(x, y)| (y - x).powi(2)).sum::<f64>().sqrt();
        for i in 0..per_segment {
            let t = i as f64 / per_segment as f64;
            ks.push(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect());
            distance.push(s + t * len);
        }
        s += len;
        vertices.push((s, w[1].0));
    }
    ks.push(corners.last().unwrap().1.clone());
    distance.push(s);
    Ok((ks, KPath { distance, vertices }))
}

/// Uniform `n^d` grid `k_j ∈ {(-n/2+1)/n, …, 1/2}`.
pub fn k_grid(dim: usize, n: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0 - (n / 2) as f64) / n as f64).collect();
    match dim {
        1 => axis.iter().map(|&k| vec![k]).collect(),
        _ => axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect(),
    }
}

pub fn band_structure(op: &BlochOperator, ks: &[Vec<f64>], n_max: usize) -> Result<BandTable> {
    let bands = ks.par_iter().map(|k| eigenvalues(op, k, n_max)).collect::<Result<Vec<_>>>()?;
    Ok(BandTable { k_grid: ks.to_vec(), bands, n_max, path: None })
}

impl BandTable {
    pub fn with_path(mut self, path: KPath) -> Self {
        self.path = Some(path);
        self
    }

    pub fn to_csv(&self) -> String {
        let d = self.k_grid.first().map_or(1, Vec::len);
        let mut out = String::new();
        let mut header: Vec<String> = (1..=d).map(|j| format!("k_{j}")).collect();
        header.extend((1..=self.n_max).map(|n| format!("lambda_{n}")));
        out.push_str(&header.join(","));
        out.push('\n');
        for (k, row) in self.k_grid.iter().zip(&self.bands) {
            let fields: Vec<String> =
                k.iter().chain(row.iter()).map(|v| format!("{v:.12e}")).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    /// Band diagram against path distance (or sample index without a path).
    pub fn to_svg(&self, title: &str) -> String {
        let xs: Vec<f64> = match &self.path {
            Some(p) => p.distance.clone(),
            None => (0..self.k_grid.len()).map(|i| i as f64).collect(),
        };
        let mut plot = LinePlot::new(title, "k", "lambda");
        for n in 0..self.n_max {
            let pts = xs.iter().zip(&self.bands).map(|(&x, row)| (x, row[n])).collect();
            plot.add(Series::line(format!("band {}", n + 1), pts));
        }
        if let Some(p) = &self.path {
            for &(x, label) in &p.vertices {
                plot.add_vertical_marker(x, if label == 'G' { "Γ".into() } else { label.to_string() });
            }
        }
        plot.render()
    }
}
