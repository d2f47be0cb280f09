//! Run configuration files for the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::amplitudes::{default_thetas, Side};
use crate::engine::{DEFAULT_MAX_DOUBLINGS, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::lab::{backscatter_probes, DirectionSpec, Grid3DSpec, DEFAULT_THETA0_DEG};
use crate::linalg::C64;
use crate::potentials::{Envelope, Potential, Potential2D, Potential3D};

/// A potential given inline or as a path relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialRef {
    File(PathBuf),
    Inline(Potential),
}

impl PotentialRef {
    fn resolve(&self, base: &Path) -> Result<Potential> {
        match self {
            PotentialRef::Inline(p) => Ok(p.clone()),
            PotentialRef::File(rel) => {
                let path = base.join(rel);
                if !path.exists() {
                    return Err(Error::invalid(format!("potential file {} does not exist", path.display())));
                }
                let text = std::fs::read_to_string(&path)?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }
}

/// Output directions: `count` uniform angles (default 181), or explicit
/// `degrees`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGrid {
    pub count: Option<usize>,
    pub degrees: Option<Vec<f64>>,
}

impl ThetaGrid {
    pub fn radians(&self) -> Result<Vec<f64>> {
        match (&self.degrees, self.count) {
            (Some(_), Some(_)) => Err(Error::invalid("theta_grid takes either count or degrees, not both")),
            (Some(d), None) => Ok(d.iter().map(|t| t.to_radians()).collect()),
            (None, c) => Ok(default_thetas(c.unwrap_or(181))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub nodes: usize,
    pub slices: Option<usize>,
    pub tol: f64,
    pub max_doublings: u32,
    pub threads: Option<usize>,
    pub n_radial: usize,
    pub n_angular: usize,
    pub z_samples: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let g = Grid3DSpec::default();
        Self {
            nodes: 64,
            slices: None,
            tol: DEFAULT_TOL,
            max_doublings: DEFAULT_MAX_DOUBLINGS,
            threads: None,
            n_radial: g.n_radial,
            n_angular: g.n_angular,
            z_samples: g.z_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombConfig {
    pub n: usize,
    pub n_prime: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DirectionsConfig {
    pub random_pairs: usize,
    pub seed: u64,
    pub backscatter_probes: bool,
}

impl Default for DirectionsConfig {
    fn default() -> Self {
        let d = DirectionSpec::default();
        Self { random_pairs: d.random_pairs, seed: d.seed, backscatter_probes: true }
    }
}

impl DirectionsConfig {
    pub fn spec(&self) -> DirectionSpec {
        let probes = if self.backscatter_probes { backscatter_probes() } else { Vec::new() };
        DirectionSpec { random_pairs: self.random_pairs, seed: self.seed, probes }
    }
}

/// What `construct` builds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConstructSpec {
    Deformation2d {
        #[serde(default)]
        base: Option<PotentialRef>,
        alpha: f64,
        order: u32,
        decay: f64,
        amplitude: C64,
        envelope: Envelope,
    },
    Deformation3d {
        #[serde(default)]
        base: Option<PotentialRef>,
        alpha: f64,
        amplitude_tilde: C64,
        scales: [f64; 3],
        orders: [u32; 2],
    },
    /// `v2 − v1`.
    Difference { v2: PotentialRef, v1: PotentialRef },
}

fn default_sides() -> Vec<Side> {
    Side::BOTH.to_vec()
}

fn default_theta0() -> Vec<f64> {
    vec![DEFAULT_THETA0_DEG]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub potentials: Vec<PotentialRef>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub k: Vec<f64>,
    #[serde(default = "default_sides")]
    pub sides: Vec<Side>,
    #[serde(default = "default_theta0")]
    pub theta0_deg: Vec<f64>,
    #[serde(default)]
    pub theta_grid: ThetaGrid,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub comb: Option<CombConfig>,
    #[serde(default)]
    pub directions: DirectionsConfig,
    #[serde(default)]
    pub construct: Option<ConstructSpec>,
    /// Directory that relative potential paths refer to.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text)?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.normalize()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::invalid(format!("config file {} does not exist", path.display())));
        }
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Sorts the k-list and rejects non-positive entries.
    fn normalize(&mut self) -> Result<()> {
        if let Some(k) = self.k.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(Error::invalid(format!("k-list entries must be positive, got {k}")));
        }
        self.k.sort_by(f64::total_cmp);
        self.k.dedup();
        if self.sides.is_empty() {
            return Err(Error::invalid("sides must not be empty"));
        }
        Ok(())
    }

    pub fn potentials(&self) -> Result<Vec<Potential>> {
        self.potentials.iter().map(|p| p.resolve(&self.base_dir)).collect()
    }

    fn potential_at(&self, i: usize, need: usize) -> Result<Potential> {
        let all = self.potentials()?;
        if all.len() < need {
            return Err(Error::invalid(format!("this command needs {need} potential(s), the config lists {}", all.len())));
        }
        Ok(all[i].clone())
    }

    pub fn potential_2d(&self, i: usize, need: usize) -> Result<Potential2D> {
        match self.potential_at(i, need)? {
            Potential::TwoD(p) => {
                p.validate()?;
                Ok(p)
            }
            Potential::ThreeD(_) => Err(Error::DimensionMismatch),
        }
    }

    pub fn potential_3d(&self, i: usize, need: usize) -> Result<Potential3D> {
        match self.potential_at(i, need)? {
            Potential::ThreeD(p) => {
                p.validate()?;
                Ok(p)
            }
            Potential::TwoD(Potential2D::Sum { members }) if members.is_empty() => Ok(Potential3D::zero()),
            Potential::TwoD(_) => Err(Error::DimensionMismatch),
        }
    }

    pub fn alpha(&self) -> Result<f64> {
        match self.alpha {
            Some(a) if a > 0.0 => Ok(a),
            Some(a) => Err(Error::invalid(format!("alpha must be positive, got {a}"))),
            None => Err(Error::invalid("this command needs alpha")),
        }
    }

    pub fn ks(&self) -> Result<&[f64]> {
        if self.k.is_empty() {
            return Err(Error::invalid("this command needs a non-empty k list"));
        }
        Ok(&self.k)
    }

    pub fn grid_3d(&self) -> Grid3DSpec {
        Grid3DSpec { n_radial: self.engine.n_radial, n_angular: self.engine.n_angular, z_samples: self.engine.z_samples }
    }

    pub fn resolve(&self, p: &PotentialRef) -> Result<Potential> {
        p.resolve(&self.base_dir)
    }
}
