//! Scenario configuration files.
//!
//! A scenario is a TOML document with the sections `material`, `mesh`,
//! `time`, `drive`, `newton` and `output`. Only `material.b` is required:
//!
//! ```toml
//! [material]
//! b = 5.0
//!
//! [mesh]
//! n_cells = 400
//! degree_policy = "center_graded"
//! ```
//!
//! Unknown keys are rejected. A `[run]` table, as written into run
//! manifests, is accepted and ignored so that a manifest can be fed back in.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use strainwave_core::{
    BoundaryDrive, DegreePolicy, HhtParams, InitialAcceleration, InitialCondition, MaterialParams,
    NewtonSettings, SimulationConfig, Source,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub material: MaterialSection,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub newton: NewtonSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    #[serde(default = "one")]
    pub rho: f64,
    pub b: f64,
    #[serde(default = "default_exponent")]
    pub a: f64,
    #[serde(default = "default_reg_eta")]
    pub reg_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    #[serde(rename = "L", default = "one")]
    pub length: f64,
    #[serde(default = "default_cells")]
    pub n_cells: usize,
    #[serde(default = "default_policy", with = "policy_text")]
    pub degree_policy: DegreePolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "one")]
    pub t_final: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    #[serde(rename = "A", default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Time between written snapshots; only the initial and final state
    /// are written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_interval: Option<f64>,
    /// Number of sampling intervals `M` per snapshot.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
}

fn one() -> f64 {
    1.0
}
fn default_exponent() -> f64 {
    1.5
}
fn default_reg_eta() -> f64 {
    MaterialParams::DEFAULT_REG_ETA
}
fn default_cells() -> usize {
    200
}
fn default_policy() -> DegreePolicy {
    DegreePolicy::Uniform(1)
}
fn default_dt() -> f64 {
    1e-3
}
fn default_alpha() -> f64 {
    HhtParams::DEFAULT_ALPHA
}
fn default_amplitude() -> f64 {
    BoundaryDrive::DEFAULT_AMPLITUDE
}
fn default_omega() -> f64 {
    2.0 * PI
}
fn default_tol() -> f64 {
    NewtonSettings::default().tol
}
fn default_k_max() -> usize {
    NewtonSettings::default().max_iters
}
fn default_samples() -> usize {
    256
}
fn default_directory() -> PathBuf {
    PathBuf::from("output")
}

impl Default for MeshSection {
    fn default() -> Self {
        Self {
            length: one(),
            n_cells: default_cells(),
            degree_policy: default_policy(),
        }
    }
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            t_final: one(),
            alpha: default_alpha(),
        }
    }
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            amplitude: default_amplitude(),
            omega: default_omega(),
        }
    }
}

impl Default for NewtonSection {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            k_max: default_k_max(),
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            snapshot_interval: None,
            samples: default_samples(),
            directory: default_directory(),
        }
    }
}

/// Text form of a degree policy: `uniform(p)` or `center_graded`.
pub fn parse_degree_policy(text: &str) -> Option<DegreePolicy> {
    let t = text.trim();
    if t == "center_graded" {
        return Some(DegreePolicy::CenterGraded);
    }
    let p = t.strip_prefix("uniform(")?.strip_suffix(')')?.trim().parse::<u8>().ok()?;
    Some(DegreePolicy::Uniform(p))
}

pub fn format_degree_policy(policy: DegreePolicy) -> String {
    match policy {
        DegreePolicy::Uniform(p) => format!("uniform({p})"),
        DegreePolicy::CenterGraded => "center_graded".to_string(),
    }
}

mod policy_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use strainwave_core::DegreePolicy;

    pub fn serialize<S: Serializer>(p: &DegreePolicy, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_degree_policy(*p))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DegreePolicy, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_degree_policy(&text)
            .ok_or_else(|| D::Error::custom(format!("expected \"uniform(p)\" or \"center_graded\", got {text:?}")))
    }
}

fn reject(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {reason}"))
}

impl ScenarioConfig {
    /// Configuration with every default applied and the given `b`.
    pub fn with_b(b: f64) -> Self {
        Self {
            material: MaterialSection {
                rho: one(),
                b,
                a: default_exponent(),
                reg_eta: default_reg_eta(),
            },
            mesh: MeshSection::default(),
            time: TimeSection::default(),
            drive: DriveSection::default(),
            newton: NewtonSection::default(),
            output: OutputSection::default(),
        }
    }

    /// Parse and validate a TOML document.
    pub fn parse(source: &str) -> Result<Self> {
        let mut table: toml::Table = source.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        table.remove("run");
        let config: ScenarioConfig = table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Check every numeric constraint, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        let m = &self.material;
        if !(m.rho > 0.0) || !m.rho.is_finite() {
            return Err(reject("material.rho", "density must be positive and finite"));
        }
        if !(m.b >= 0.0) || !m.b.is_finite() {
            return Err(reject("material.b", "must be non-negative and finite"));
        }
        if !(m.a > 0.0) || !m.a.is_finite() {
            return Err(reject("material.a", "exponent must be positive"));
        }
        if !(m.reg_eta > 0.0) || !m.reg_eta.is_finite() {
            return Err(reject("material.reg_eta", "must be positive"));
        }
        let mesh = &self.mesh;
        if !(mesh.length > 0.0) || !mesh.length.is_finite() {
            return Err(reject("mesh.L", "length must be positive"));
        }
        if mesh.n_cells == 0 {
            return Err(reject("mesh.n_cells", "need at least one cell"));
        }
        if let DegreePolicy::Uniform(p) = mesh.degree_policy {
            if !(1..=3).contains(&p) {
                return Err(reject("mesh.degree_policy", format!("degree {p} outside 1..=3")));
            }
        }
        let t = &self.time;
        if !(t.dt > 0.0) || !t.dt.is_finite() {
            return Err(reject("time.dt", "must be positive"));
        }
        if !(t.t_final > 0.0) || !t.t_final.is_finite() {
            return Err(reject("time.t_final", "must be positive"));
        }
        if !(-1.0 / 3.0..=0.0).contains(&t.alpha) {
            return Err(reject("time.alpha", format!("{} outside [-1/3, 0]", t.alpha)));
        }
        if !self.drive.amplitude.is_finite() || !self.drive.omega.is_finite() {
            return Err(reject("drive", "amplitude and frequency must be finite"));
        }
        if !(self.newton.tol > 0.0) {
            return Err(reject("newton.tol", "must be positive"));
        }
        if self.newton.k_max == 0 {
            return Err(reject("newton.k_max", "need at least one iteration"));
        }
        let out = &self.output;
        if let Some(dt) = out.snapshot_interval {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(reject("output.snapshot_interval", "must be positive"));
            }
        }
        if out.samples == 0 {
            return Err(reject("output.samples", "need at least one sampling interval"));
        }
        self.simulation().validate().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn material(&self) -> MaterialParams {
        MaterialParams {
            rho: self.material.rho,
            b: self.material.b,
            a: self.material.a,
            reg_eta: self.material.reg_eta,
        }
    }

    pub fn newton(&self) -> NewtonSettings {
        NewtonSettings {
            tol: self.newton.tol,
            max_iters: self.newton.k_max,
            ..NewtonSettings::default()
        }
    }

    /// Boundary-driven run from rest.
    pub fn simulation(&self) -> SimulationConfig {
        SimulationConfig {
            material: self.material(),
            length: self.mesh.length,
            n_cells: self.mesh.n_cells,
            degree_policy: self.mesh.degree_policy,
            dt: self.time.dt,
            t_final: self.time.t_final,
            alpha: self.time.alpha,
            drive: BoundaryDrive::new(self.drive.amplitude, self.drive.omega),
            newton: self.newton(),
            initial_condition: InitialCondition::Rest,
            initial_acceleration: InitialAcceleration::Solve,
            source: Source::None,
            snapshot_interval: self.output.snapshot_interval,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable")
    }
}
