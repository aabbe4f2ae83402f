//! Run configuration.
//!
//! A TOML document whose first key is `version = 1`:
//!
//! ```toml
//! version = 1
//!
//! [testcase]
//! name = "cantilever_beam"      # swinging_plate | beryllium_plate | cantilever_beam
//!                               # | uniform_block | contact_drop
//! [run]
//! t_final = 1.5                 # defaults to the test case's own final time
//! order = "second"              # first | second
//! cascade = "three_level"       # three_level | two_level
//! output_dir = "out"
//! output_times = [0.375, 0.75, 1.125, 1.5]
//!
//! [mesh]
//! file = "beam.mesh"            # native format or .msh v2; relative to this file
//! nx = 8                        # or a generated rectangle with nx × ny squares
//! ny = 48
//! refine = 0                    # uniform refinements applied after loading
//!
//! [material]                    # overrides the test case material
//! rho0 = 1100.0
//! E = 1.7e7
//! nu = 0.45
//! a = -1.0
//! eos = "neo_hookean"           # or "stiffened_gas" with gamma and p_inf
//!
//! [[bc]]                        # overrides the test case conditions
//! tag = "bottom"
//! kind = "fixed_point"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constitutive::{Eos, MaterialModel};
use crate::error::SolverError;
use crate::mood::Cascade;
use crate::solver::{BcKind, CnVelocity, Order};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub testcase: TestCaseConfig,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub mesh: MeshSection,
    pub material: Option<MaterialSection>,
    #[serde(default)]
    pub bc: Vec<BcSection>,
    /// Directory the configuration was read from; relative paths resolve here.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestCaseConfig {
    pub name: String,
    /// Velocity amplitude (swinging plate displacement amplitude, beam and
    /// drop speed).
    pub amplitude: Option<f64>,
    /// Uniform velocity of `uniform_block`.
    pub velocity: Option<[f64; 2]>,
    /// Initial wall gap of `contact_drop`.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub t_final: Option<f64>,
    pub order: Order,
    pub cascade: Cascade,
    pub cn_velocity: CnVelocity,
    pub c_cfl: f64,
    pub c_v: f64,
    pub c_i: f64,
    pub picard_iterations: usize,
    pub rdmp: bool,
    /// RDMP floor `delta0` relative to the local density instead of absolute.
    pub rdmp_relative: bool,
    /// Widen the RDMP extrema with the cell's linear density at its vertices.
    pub rdmp_vertex_extrapolation: bool,
    pub involution: bool,
    /// Involution test on the residual added by the step only.
    pub involution_increment: bool,
    pub max_steps: usize,
    pub output_dir: PathBuf,
    pub output_times: Vec<f64>,
    /// Snapshot every this many steps; 0 disables.
    pub output_every: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_final: None,
            order: Order::Second,
            cascade: Cascade::ThreeLevel,
            cn_velocity: CnVelocity::Trajectory,
            c_cfl: 0.4,
            c_v: 0.2,
            c_i: 0.1,
            picard_iterations: 2,
            rdmp: true,
            rdmp_relative: true,
            rdmp_vertex_extrapolation: true,
            involution: true,
            involution_increment: true,
            max_steps: 10_000_000,
            output_dir: PathBuf::from("out"),
            output_times: Vec::new(),
            output_every: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    pub file: Option<PathBuf>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub refine: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub rho0: f64,
    #[serde(rename = "E")]
    pub young: f64,
    pub nu: f64,
    #[serde(default = "neo_hookean_a")]
    pub a: f64,
    #[serde(default = "neo_hookean_eos")]
    pub eos: String,
    pub gamma: Option<f64>,
    pub p_inf: Option<f64>,
}

fn neo_hookean_a() -> f64 {
    -1.0
}

fn neo_hookean_eos() -> String {
    "neo_hookean".into()
}

impl MaterialSection {
    pub fn build(&self) -> Result<MaterialModel, SolverError> {
        let eos = match self.eos.as_str() {
            "neo_hookean" => Eos::NeoHookean,
            "stiffened_gas" => Eos::StiffenedGas {
                gamma: self
                    .gamma
                    .ok_or_else(|| SolverError::Config("stiffened_gas needs gamma".into()))?,
                p_inf: self.p_inf.unwrap_or(0.0),
            },
            other => return Err(SolverError::Config(format!("unknown eos `{other}`"))),
        };
        Ok(MaterialModel::new(
            self.rho0, self.young, self.nu, self.a, eos,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcSection {
    pub tag: String,
    #[serde(flatten)]
    pub kind: BcKind,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, SolverError> {
        let first = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'));
        if !first.is_some_and(|l| l.starts_with("version")) {
            return Err(SolverError::Config(
                "the first entry must be `version = 1`".into(),
            ));
        }
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| SolverError::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(SolverError::Config(format!(
                "unsupported config version {}",
                cfg.version
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SolverError> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), SolverError> {
        let r = &self.run;
        for (name, v) in [("c_cfl", r.c_cfl), ("c_v", r.c_v), ("c_i", r.c_i)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(SolverError::Config(format!("{name} must lie in (0, 1]")));
            }
        }
        if let Some(t) = r.t_final {
            if !(t >= 0.0) {
                return Err(SolverError::Config("t_final must be non-negative".into()));
            }
        }
        if r.picard_iterations == 0 {
            return Err(SolverError::Config(
                "picard_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
