use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::dynamics::{Base, CircleKind, CircleMap, FiberFamily, MapSystem, SkewProduct, TorusEndomorphism};
use crate::error::{Error, Result};
use crate::operator::{Basis, Discretization, EigenOptions, Quadrature, Scheme};
use crate::potentials::{flatten, geometric_potential, GeometricScope, Potential, TrigTerm};
use crate::thermo::{uniform_grid, Direction, SweepOptions};

/// A circle map: a closed-form family and an optional rotation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSpec {
    pub family: CircleKind,
    #[serde(default)]
    pub shift: f64,
}

impl CircleSpec {
    fn build(&self) -> Result<CircleMap> {
        Ok(CircleMap::new(self.family.clone())?.rotated(self.shift))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSpec {
    Circle { family: CircleKind, #[serde(default)] shift: f64 },
    Torus { matrix: Vec<Vec<i64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Circle { family: CircleKind, #[serde(default)] shift: f64 },
    Torus { matrix: Vec<Vec<i64>> },
    Skew { base: BaseSpec, fiber: FiberFamily },
}

impl MapSpec {
    pub fn build(&self) -> Result<MapSystem> {
        Ok(match self {
            MapSpec::Circle { family, shift } => {
                CircleSpec { family: family.clone(), shift: *shift }.build()?.into()
            }
            MapSpec::Torus { matrix } => TorusEndomorphism::new(matrix.clone())?.into(),
            MapSpec::Skew { base, fiber } => {
                let base = match base {
                    BaseSpec::Circle { family, shift } => {
                        Base::Circle(CircleSpec { family: family.clone(), shift: *shift }.build()?)
                    }
                    BaseSpec::Torus { matrix } => Base::Torus(TorusEndomorphism::new(matrix.clone())?),
                };
                SkewProduct::new(base, fiber.clone())?.into()
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Constant { value: f64 },
    /// `cos(2 pi x_1)`.
    Cosine,
    Trig { #[serde(default)] constant: f64, terms: Vec<TrigTerm> },
    Geometric { #[serde(default = "full_scope")] scope: GeometricScope },
    /// Multilinear periodic interpolation of grid values.
    Grid { shape: Vec<usize>, values: Vec<f64> },
    Flattened { epsilon: f64, inner: Box<PotentialSpec> },
}

fn full_scope() -> GeometricScope {
    GeometricScope::Full
}

impl PotentialSpec {
    pub fn build(&self, map: &MapSystem) -> Result<Potential> {
        Ok(match self {
            PotentialSpec::Constant { value } => Potential::constant(*value),
            PotentialSpec::Cosine => Potential::cosine(),
            PotentialSpec::Trig { constant, terms } => {
                if let Some(t) = terms.iter().find(|t| t.freq.len() != map.dim()) {
                    return Err(Error::InvalidPotential(format!(
                        "frequency {:?} does not match dimension {}",
                        t.freq,
                        map.dim()
                    )));
                }
                Potential::trig_poly(*constant, terms.clone())
            }
            PotentialSpec::Geometric { scope } => geometric_potential(map, *scope)?,
            PotentialSpec::Grid { shape, values } => Potential::custom_grid(shape.clone(), values.clone())?,
            PotentialSpec::Flattened { epsilon, inner } => flatten(&inner.build(map)?, *epsilon, map)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TRange {
    pub min: f64,
    pub max: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    161
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    /// Preimage-tree depths.
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    /// Base points of the preimage trees (first coordinate; others 0).
    #[serde(default = "default_x0")]
    pub x0: Vec<f64>,
    /// Period of the periodic-orbit sum; `0` disables it.
    #[serde(default = "default_period")]
    pub period: usize,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_depths() -> Vec<usize> {
    vec![8, 10, 12, 14, 16]
}

fn default_x0() -> Vec<f64> {
    vec![0.0]
}

fn default_period() -> usize {
    14
}

fn default_budget() -> u64 {
    1 << 24
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            depths: default_depths(),
            x0: default_x0(),
            period: default_period(),
            budget: default_budget(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub eigen: Option<f64>,
    pub subleading: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnsetSettings {
    pub direction: Direction,
    pub t_max: f64,
    #[serde(default = "default_onset_points")]
    pub points: usize,
}

fn default_onset_points() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlattenSettings {
    #[serde(default = "default_k_min")]
    pub k_min: u32,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    /// Samples per axis for the sup-norm estimate.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Radius used for the gap check; none skips it.
    pub gap_epsilon: Option<f64>,
    #[serde(default)]
    pub gap_t: Vec<f64>,
}

fn default_k_min() -> u32 {
    2
}

fn default_k_max() -> u32 {
    8
}

fn default_samples() -> usize {
    64
}

impl Default for FlattenSettings {
    fn default() -> Self {
        Self {
            k_min: default_k_min(),
            k_max: default_k_max(),
            samples: default_samples(),
            gap_epsilon: None,
            gap_t: Vec::new(),
        }
    }
}

/// One experiment, read from a single JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: MapSpec,
    pub potential: PotentialSpec,
    pub scheme: Scheme,
    #[serde(default)]
    pub basis: Basis,
    #[serde(default)]
    pub quadrature: Quadrature,
    /// Refinement ladder, strictly increasing.
    pub n: Vec<usize>,
    pub t: TRange,
    /// Evaluation point of single-`t` subcommands.
    #[serde(default = "default_t_eval")]
    pub t_eval: f64,
    #[serde(default)]
    pub oracle: OracleSettings,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    pub workers: Option<usize>,
    /// Local ×4 refinement inside candidates during gap scans.
    #[serde(default = "default_true")]
    pub refine: bool,
    pub onset: Option<OnsetSettings>,
    #[serde(default)]
    pub flatten: FlattenSettings,
    /// Largest iterate tried by the expanding-on-average certificate.
    #[serde(default = "default_l_max")]
    pub l_max: usize,
}

fn default_t_eval() -> f64 {
    1.0
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

fn default_l_max() -> usize {
    4
}

impl ExperimentConfig {
    /// Parses and validates a JSON document; errors name the offending
    /// field path and source line.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            Error::Config {
                path: e.path().to_string(),
                message: format!("{inner} (line {}, column {})", inner.line(), inner.column()),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| Err(Error::Config { path: path.into(), message });
        if self.n.is_empty() {
            return bad("n", "refinement ladder is empty".into());
        }
        if self.n.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n", format!("refinement ladder {:?} is not strictly increasing", self.n));
        }
        if !(self.t.min <= self.t.max) || self.t.steps == 0 {
            return bad("t", format!("empty t range [{}, {}] with {} steps", self.t.min, self.t.max, self.t.steps));
        }
        if self.t.min < self.t.max && self.t.steps < 2 {
            return bad("t.steps", "a nondegenerate range needs at least 2 steps".into());
        }
        if self.workers == Some(0) {
            return bad("workers", "worker count must be positive".into());
        }
        Ok(())
    }

    pub fn t_grid(&self) -> Vec<f64> {
        if self.t.min == self.t.max {
            vec![self.t.min]
        } else {
            uniform_grid(self.t.min, self.t.max, self.t.steps)
        }
    }

    pub fn discretization(&self, n: usize) -> Discretization {
        Discretization { scheme: self.scheme, n, basis: self.basis, quadrature: self.quadrature }
    }

    pub fn ladder(&self) -> Vec<Discretization> {
        self.n.iter().map(|&n| self.discretization(n)).collect()
    }

    pub fn finest(&self) -> Discretization {
        self.discretization(*self.n.last().expect("validated nonempty ladder"))
    }

    pub fn eigen_options(&self) -> EigenOptions {
        let mut o = EigenOptions::default();
        if let Some(t) = self.tolerances.eigen {
            o.tol = t;
        }
        if let Some(t) = self.tolerances.subleading {
            o.sub_tol = t;
        }
        if let Some(m) = self.tolerances.max_iter {
            o.max_iter = m;
        }
        o
    }

    pub fn sweep_options(&self, gap: bool) -> SweepOptions {
        SweepOptions { eigen: self.eigen_options(), gap }
    }
}
