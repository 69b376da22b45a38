use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::bands::{BlochOperator, BlochOperatorSpec, Sector};
use crate::coefficients::PeriodicCoefficients;
use crate::effective::Nonlinearity;
use crate::error::{Error, Result};
use crate::townes::ShootingOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gp,
    Nlw,
}

/// A coefficient field as written in the configuration file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CoefficientDef {
    /// `amplitude · ∏ cos(x_j) + offset`.
    Builtin {
        builtin: String,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
    Constant {
        constant: f64,
    },
    Modes {
        modes: Vec<ModeDef>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeDef {
    pub m: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn one() -> f64 {
    1.0
}

impl CoefficientDef {
    pub fn build(&self, dim: usize) -> Result<PeriodicCoefficients> {
        let c = match self {
            CoefficientDef::Builtin { builtin, amplitude, offset } => match builtin.as_str() {
                "cosprod" => PeriodicCoefficients::cosprod(dim, *amplitude, *offset),
                other => return Err(Error::Config(format!("unknown builtin coefficient '{other}'"))),
            },
            CoefficientDef::Constant { constant } => PeriodicCoefficients::constant(dim, *constant),
            CoefficientDef::Modes { modes } => {
                if modes.is_empty() {
                    return Err(Error::Config("explicit coefficient needs at least one mode".into()));
                }
                let list: Vec<(Vec<i64>, Complex64)> =
                    modes.iter().map(|m| (m.m.clone(), Complex64::new(m.re, m.im))).collect();
                PeriodicCoefficients::from_modes(dim, &list).map_err(|e| Error::Config(e.to_string()))?
            }
        };
        c.check_real()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSection {
    pub potential: Option<CoefficientDef>,
    pub sigma: Option<CoefficientDef>,
    pub chi1: Option<CoefficientDef>,
    pub chi2: Option<CoefficientDef>,
    pub chi3: Option<CoefficientDef>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSection {
    pub k0: Vec<f64>,
    pub band: usize,
    #[serde(default)]
    pub sector: Option<Sector>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsSection {
    pub truncation: usize,
    pub path: String,
    pub nmax: usize,
    pub per_segment: usize,
}

impl Default for BandsSection {
    fn default() -> Self {
        Self { truncation: 12, path: "GXMG".into(), nmax: 8, per_segment: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationSection {
    pub cell_points: usize,
    pub dt: f64,
    pub record_every: usize,
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self { cell_points: 16, dt: 0.02, record_every: 25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoxPolicy {
    /// `[-20π - 5/(4ε²), 20π + 5/(4ε²)] × [-40π, 40π]`.
    Full,
    /// Half-widths `factor/ε` plus a ten-cell margin, plus half the travel
    /// distance along the group velocity.
    Scaled { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TEndPolicy {
    Fixed(f64),
    /// `t0 / ε²`.
    OneOverEps2 { t0: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum TEndRaw {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct StudyRaw {
    eps: Vec<f64>,
    #[serde(default = "default_policy")]
    box_policy: String,
    #[serde(default = "default_factor")]
    box_factor: f64,
    #[serde(default = "default_t_end")]
    t_end: TEndRaw,
    #[serde(default = "one")]
    t0: f64,
    #[serde(default = "default_output")]
    output_dir: PathBuf,
}

fn default_policy() -> String {
    "scaled".into()
}
fn default_factor() -> f64 {
    8.0
}
fn default_t_end() -> TEndRaw {
    TEndRaw::Named("one_over_eps2".into())
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolitonSection {
    pub rho_max: f64,
    pub d_rho: f64,
}

impl Default for SolitonSection {
    fn default() -> Self {
        let o = ShootingOptions::default();
        Self { rho_max: o.rho_max, d_rho: o.d_rho }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonresSection {
    pub n_scan: usize,
}

impl Default for NonresSection {
    fn default() -> Self {
        Self { n_scan: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelSection,
    coefficients: CoefficientSection,
    carrier: CarrierSection,
    #[serde(default)]
    bands: BandsSection,
    #[serde(default)]
    discretization: DiscretizationSection,
    study: Option<StudyRaw>,
    #[serde(default)]
    soliton: SolitonSection,
    #[serde(default)]
    nonres: NonresSection,
}

/// Validated study configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub model: ModelKind,
    pub dim: usize,
    pub coefficients: CoefficientSection,
    pub k0: Vec<f64>,
    pub n0: usize,
    pub sector: Option<Sector>,
    pub bands: BandsSection,
    pub discretization: DiscretizationSection,
    pub eps_list: Vec<f64>,
    pub box_policy: BoxPolicy,
    pub t_end: TEndPolicy,
    pub output_dir: PathBuf,
    pub soliton: SolitonSection,
    pub nonres: NonresSection,
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::validate(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    fn validate(raw: RawConfig) -> Result<Self> {
        let dim = raw.model.dim;
        if !(1..=2).contains(&dim) {
            return Err(Error::Config(format!("model.dim must be 1 or 2, got {dim}")));
        }
        let k0 = raw.carrier.k0;
        if k0.len() != dim {
            return Err(Error::Config(format!("carrier.k0 must have {dim} components")));
        }
        if k0.iter().any(|k| !(-0.5..=0.5).contains(k)) {
            return Err(Error::Config(format!("carrier.k0 = {k0:?} lies outside the Brillouin zone")));
        }
        if raw.carrier.band == 0 {
            return Err(Error::Config("carrier.band is 1-based".into()));
        }
        let c = &raw.coefficients;
        match raw.model.kind {
            ModelKind::Gp if c.potential.is_none() || c.sigma.is_none() => {
                return Err(Error::Config("gp model needs coefficients.potential and coefficients.sigma".into()));
            }
            ModelKind::Nlw if c.chi1.is_none() || c.chi2.is_none() || c.chi3.is_none() => {
                return Err(Error::Config("nlw model needs coefficients.chi1, chi2 and chi3".into()));
            }
            _ => {}
        }
        let disc = raw.discretization;
        if disc.cell_points < 4 || disc.cell_points % 2 != 0 {
            return Err(Error::Config(format!(
                "discretization.cell_points must be even and >= 4, got {}",
                disc.cell_points
            )));
        }
        if !(disc.dt > 0.0) || disc.record_every == 0 {
            return Err(Error::Config("discretization.dt must be positive and record_every >= 1".into()));
        }
        let (eps_list, box_policy, t_end, output_dir) = match raw.study {
            Some(s) => {
                if s.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
                    return Err(Error::Config("study.eps values must lie in (0, 1)".into()));
                }
                if s.eps.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::Config("study.eps must be strictly decreasing".into()));
                }
                let policy = match s.box_policy.as_str() {
                    "full" => BoxPolicy::Full,
                    "scaled" if s.box_factor > 0.0 => BoxPolicy::Scaled { factor: s.box_factor },
                    "scaled" => return Err(Error::Config("study.box_factor must be positive".into())),
                    other => return Err(Error::Config(format!("unknown box policy '{other}'"))),
                };
                let t_end = match s.t_end {
                    TEndRaw::Fixed(t) if t > 0.0 => TEndPolicy::Fixed(t),
                    TEndRaw::Named(n) if n == "one_over_eps2" && s.t0 > 0.0 => {
                        TEndPolicy::OneOverEps2 { t0: s.t0 }
                    }
                    other => return Err(Error::Config(format!("invalid study.t_end {other:?}"))),
                };
                (s.eps, policy, t_end, s.output_dir)
            }
            None => (Vec::new(), BoxPolicy::Scaled { factor: 8.0 }, TEndPolicy::OneOverEps2 { t0: 1.0 }, default_output()),
        };
        Ok(Self {
            model: raw.model.kind,
            dim,
            coefficients: raw.coefficients,
            k0,
            n0: raw.carrier.band,
            sector: raw.carrier.sector,
            bands: raw.bands,
            discretization: disc,
            eps_list,
            box_policy,
            t_end,
            output_dir,
            soliton: raw.soliton,
            nonres: raw.nonres,
        })
    }

    fn coefficient(&self, def: &Option<CoefficientDef>, name: &str) -> Result<PeriodicCoefficients> {
        def.as_ref()
            .ok_or_else(|| Error::Config(format!("coefficients.{name} missing")))?
            .build(self.dim)
    }

    /// Linear operator specification, without the carrier sector.
    pub fn operator_spec(&self) -> Result<BlochOperatorSpec> {
        let n = self.bands.truncation;
        Ok(match self.model {
            ModelKind::Gp => {
                BlochOperatorSpec::schrodinger(self.coefficient(&self.coefficients.potential, "potential")?, n)
            }
            ModelKind::Nlw => BlochOperatorSpec::wave(
                self.coefficient(&self.coefficients.chi1, "chi1")?,
                self.coefficient(&self.coefficients.chi2, "chi2")?,
                n,
            ),
        })
    }

    /// Full-space operator.
    pub fn operator(&self) -> Result<BlochOperator> {
        BlochOperator::new(self.operator_spec()?)
    }

    /// Operator restricted to the carrier sector when one is configured.
    pub fn carrier_operator(&self) -> Result<BlochOperator> {
        let spec = self.operator_spec()?;
        BlochOperator::new(match &self.sector {
            Some(s) => spec.with_sector(s.clone()),
            None => spec,
        })
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        Ok(match self.model {
            ModelKind::Gp => Nonlinearity::Gp { sigma: self.coefficient(&self.coefficients.sigma, "sigma")? },
            ModelKind::Nlw => Nonlinearity::Nlw { chi3: self.coefficient(&self.coefficients.chi3, "chi3")? },
        })
    }

    pub fn potential(&self) -> Result<PeriodicCoefficients> {
        self.coefficient(&self.coefficients.potential, "potential")
    }

    pub fn sigma(&self) -> Result<PeriodicCoefficients> {
        self.coefficient(&self.coefficients.sigma, "sigma")
    }

    pub fn shooting_options(&self) -> ShootingOptions {
        ShootingOptions { rho_max: self.soliton.rho_max, d_rho: self.soliton.d_rho, ..Default::default() }
    }

    pub fn t_end(&self, eps: f64) -> f64 {
        match self.t_end {
            TEndPolicy::Fixed(t) => t,
            TEndPolicy::OneOverEps2 { t0 } => t0 / (eps * eps),
        }
    }
}
