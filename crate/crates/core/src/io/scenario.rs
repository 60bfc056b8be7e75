//! Scenario files: the JSON description of a channel plus solver settings.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelInstance, DerivedMatrices};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::multitone::{stack_multitone, MultiToneInstance};

pub const SCENARIO_VERSION: &str = "sumrate-scenario/1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainUnit {
    #[default]
    Linear,
    /// `10 log10` of the linear gain.
    Db,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseUnit {
    /// Watts, the same unit as the power caps.
    #[default]
    Linear,
    /// Decibels relative to one milliwatt.
    Dbm,
}

/// Gain data: one `L×L` matrix, or one per tone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gains {
    Single(Vec<Vec<f64>>),
    Tones(Vec<Vec<Vec<f64>>>),
}

/// Noise data: one vector, or one per tone. A single vector is shared by
/// every tone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Noise {
    Single(Vec<f64>),
    Tones(Vec<Vec<f64>>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Gradient,
    Linearized,
    Lp,
}

impl Algorithm {
    pub const NAMES: [&'static str; 3] = ["gradient", "linearized", "lp"];
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(Self::Gradient),
            "linearized" => Ok(Self::Linearized),
            "lp" => Ok(Self::Lp),
            _ => Err(Error::InputDomain(format!(
                "unknown algorithm `{s}`; expected one of {}",
                Self::NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = match self {
            Self::Gradient => 0,
            Self::Linearized => 1,
            Self::Lp => 2,
        };
        f.write_str(Self::NAMES[i])
    }
}

fn default_grid() -> Vec<usize> {
    vec![4]
}

fn default_kkt_tol() -> f64 {
    crate::solvers::KKT_TOL
}

fn default_starts() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default)]
    pub algorithm: Algorithm,
    /// Box floor depth of the polytope; `log R + 10` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Polytope grid points per slot.
    #[serde(default = "default_grid")]
    pub grid: Vec<usize>,
    #[serde(default = "default_kkt_tol")]
    pub kkt_tol: f64,
    /// Iteration cap; each algorithm has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Multi-start count of the gradient solver.
    #[serde(default = "default_starts")]
    pub starts: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::default(),
            k: None,
            grid: default_grid(),
            kkt_tol: default_kkt_tol(),
            max_iter: None,
            seed: 0,
            starts: default_starts(),
        }
    }
}

fn default_snr_gap() -> f64 {
    1.0
}

fn is_linear_gain(u: &GainUnit) -> bool {
    *u == GainUnit::Linear
}

fn is_linear_noise(u: &NoiseUnit) -> bool {
    *u == NoiseUnit::Linear
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: String,
    pub users: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tones: Option<usize>,
    pub gains: Gains,
    #[serde(default, skip_serializing_if = "is_linear_gain")]
    pub gain_unit: GainUnit,
    pub noise: Noise,
    #[serde(default, skip_serializing_if = "is_linear_noise")]
    pub noise_unit: NoiseUnit,
    /// Per-user power cap (single tone) or budget across tones.
    pub caps: Vec<f64>,
    /// Uniform `1/L` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_snr_gap")]
    pub snr_gap: f64,
    /// Explicit `KL×KL` slot interference matrix, linear units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub solver: SolverSettings,
}

/// The model a scenario describes.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Single(ChannelInstance<f64>),
    Multi(MultiToneInstance<f64>),
}

impl Model {
    pub fn derive(&self) -> Result<DerivedMatrices<f64>> {
        match self {
            Model::Single(c) => c.derive(),
            Model::Multi(m) => stack_multitone(m),
        }
    }
}

fn schema(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::schema(field, reason)
}

fn db_to_linear(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn dbm_to_watts(x: f64) -> f64 {
    10f64.powf((x - 30.0) / 10.0)
}

fn check_positive(field: &str, x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        Some(i) => Err(schema(
            format!("{field}[{i}]"),
            format!("must be positive and finite, got {}", x[i]),
        )),
        None => Ok(()),
    }
}

fn check_square(field: &str, m: &[Vec<f64>], n: usize) -> Result<()> {
    if m.len() != n {
        return Err(schema(field, format!("has {} rows, expected {n}", m.len())));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(schema(
                format!("{field}[{i}]"),
                format!("has {} entries, expected {n}", row.len()),
            ));
        }
    }
    Ok(())
}

fn matrix(rows: &[Vec<f64>]) -> Result<Matrix<f64>> {
    Matrix::from_rows(rows)
}

impl ScenarioFile {
    /// Canonical form: linear units, explicit weights, and the single-tone
    /// layout whenever there is one tone and no explicit coupling.
    pub fn normalize(&self) -> Result<ScenarioFile> {
        if self.version != SCENARIO_VERSION {
            return Err(schema(
                "version",
                format!("unsupported `{}`, expected `{SCENARIO_VERSION}`", self.version),
            ));
        }
        let l = self.users;
        if l < 2 {
            return Err(schema("users", "at least two users are required"));
        }
        let mut gains = match &self.gains {
            Gains::Single(g) => vec![g.clone()],
            Gains::Tones(t) => t.clone(),
        };
        let k = gains.len();
        if k == 0 {
            return Err(schema("gains", "no gain matrices given"));
        }
        if let Some(t) = self.tones {
            if t != k {
                return Err(schema("tones", format!("is {t} but gains describe {k} tones")));
            }
        }
        for (t, g) in gains.iter_mut().enumerate() {
            let field = if k == 1 {
                "gains".to_string()
            } else {
                format!("gains[{t}]")
            };
            check_square(&field, g, l)?;
            if self.gain_unit == GainUnit::Db {
                g.iter_mut().flatten().for_each(|x| *x = db_to_linear(*x));
            }
            for (i, row) in g.iter().enumerate() {
                check_positive(&format!("{field}[{i}]"), row)?;
            }
        }
        let mut noise = match &self.noise {
            Noise::Single(v) => vec![v.clone(); k],
            Noise::Tones(t) => t.clone(),
        };
        if noise.len() != k {
            return Err(schema(
                "noise",
                format!("given for {} tones, expected {k}", noise.len()),
            ));
        }
        for (t, v) in noise.iter_mut().enumerate() {
            let field = if k == 1 {
                "noise".to_string()
            } else {
                format!("noise[{t}]")
            };
            if v.len() != l {
                return Err(schema(field, format!("has {} entries, expected {l}", v.len())));
            }
            if self.noise_unit == NoiseUnit::Dbm {
                v.iter_mut().for_each(|x| *x = dbm_to_watts(*x));
            }
            check_positive(&field, v)?;
        }
        if self.caps.len() != l {
            return Err(schema("caps", format!("has {} entries, expected {l}", self.caps.len())));
        }
        check_positive("caps", &self.caps)?;
        let weights = match &self.weights {
            Some(w) => {
                if w.len() != l {
                    return Err(schema("weights", format!("has {} entries, expected {l}", w.len())));
                }
                if let Some(i) = w.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
                    return Err(schema(format!("weights[{i}]"), "must be nonnegative"));
                }
                let s: f64 = w.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(schema("weights", format!("sum to {s}, expected 1")));
                }
                w.clone()
            }
            None => vec![1.0 / l as f64; l],
        };
        if !(self.snr_gap >= 1.0) || !self.snr_gap.is_finite() {
            return Err(schema("snr_gap", format!("must be at least 1, got {}", self.snr_gap)));
        }
        if let Some(c) = &self.coupling {
            check_square("coupling", c, k * l)?;
            if c.iter().flatten().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(schema("coupling", "entries must be nonnegative and finite"));
            }
        }
        let s = &self.solver;
        if let Some(kf) = s.k {
            if !kf.is_finite() {
                return Err(schema("solver.k", "must be finite"));
            }
        }
        if s.grid.is_empty() || s.grid.iter().any(|&m| m < 2) {
            return Err(schema("solver.grid", "needs at least 2 points per axis"));
        }
        if s.grid.len() != 1 && s.grid.len() != k * l {
            return Err(schema(
                "solver.grid",
                format!("has {} entries, expected 1 or {}", s.grid.len(), k * l),
            ));
        }
        if !(s.kkt_tol > 0.0) {
            return Err(schema("solver.kkt_tol", "must be positive"));
        }
        if s.starts == 0 {
            return Err(schema("solver.starts", "must be at least 1"));
        }
        let single = k == 1 && self.coupling.is_none();
        Ok(ScenarioFile {
            version: SCENARIO_VERSION.to_string(),
            users: l,
            tones: if single { None } else { Some(k) },
            gains: if single {
                Gains::Single(gains.pop().expect("one tone"))
            } else {
                Gains::Tones(gains)
            },
            gain_unit: GainUnit::Linear,
            noise: if single {
                Noise::Single(noise.pop().expect("one tone"))
            } else {
                Noise::Tones(noise)
            },
            noise_unit: NoiseUnit::Linear,
            caps: self.caps.clone(),
            weights: Some(weights),
            snr_gap: self.snr_gap,
            coupling: self.coupling.clone(),
            solver: self.solver.clone(),
        })
    }

    /// Builds the channel model from the canonical form.
    pub fn model(&self) -> Result<Model> {
        let n = self.normalize()?;
        let weights = n.weights.expect("normalized weights");
        match (&n.gains, &n.noise) {
            (Gains::Single(g), Noise::Single(v)) => Ok(Model::Single(ChannelInstance::new(
                matrix(g)?,
                v.clone(),
                n.caps,
                weights,
                n.snr_gap,
            )?)),
            (Gains::Tones(g), Noise::Tones(v)) => {
                let mt = MultiToneInstance {
                    gains: g.iter().map(|m| matrix(m)).collect::<Result<_>>()?,
                    noise: v.clone(),
                    budgets: n.caps,
                    weights,
                    snr_gap: n.snr_gap,
                    coupling: n.coupling.as_deref().map(matrix).transpose()?,
                };
                mt.validate()?;
                Ok(Model::Multi(mt))
            }
            _ => unreachable!("normalize pairs gain and noise layouts"),
        }
    }

    pub fn derive(&self) -> Result<DerivedMatrices<f64>> {
        self.model()?.derive()
    }

    /// Hex SHA-256 of the compact JSON of the canonical form.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(&self.normalize()?)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    pub fn from_single(c: &ChannelInstance<f64>, solver: SolverSettings) -> Self {
        ScenarioFile {
            version: SCENARIO_VERSION.to_string(),
            users: c.users(),
            tones: None,
            gains: Gains::Single(c.gains.to_rows()),
            gain_unit: GainUnit::Linear,
            noise: Noise::Single(c.noise.clone()),
            noise_unit: NoiseUnit::Linear,
            caps: c.caps.clone(),
            weights: Some(c.weights.clone()),
            snr_gap: c.snr_gap,
            coupling: None,
            solver,
        }
    }

    pub fn from_multi(m: &MultiToneInstance<f64>, solver: SolverSettings) -> Self {
        ScenarioFile {
            version: SCENARIO_VERSION.to_string(),
            users: m.users(),
            tones: Some(m.tones()),
            gains: Gains::Tones(m.gains.iter().map(|g| g.to_rows()).collect()),
            gain_unit: GainUnit::Linear,
            noise: Noise::Tones(m.noise.clone()),
            noise_unit: NoiseUnit::Linear,
            caps: m.budgets.clone(),
            weights: Some(m.weights.clone()),
            snr_gap: m.snr_gap,
            coupling: m.coupling.as_ref().map(|c| c.to_rows()),
            solver,
        }
    }
}

/// Parses and normalizes a scenario.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    let raw: ScenarioFile = serde_json::from_str(text).map_err(|e| schema(json_field(&e), e.to_string()))?;
    raw.normalize()
}

fn json_field(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    // serde names the offending key first, in backticks
    msg.split('`')
        .nth(1)
        .filter(|f| !f.is_empty())
        .unwrap_or("<document>")
        .to_string()
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

pub fn scenario_to_string(s: &ScenarioFile) -> Result<String> {
    let mut out = serde_json::to_string_pretty(s)?;
    out.push('\n');
    Ok(out)
}

/// Writes the canonical form of `s`.
pub fn save_scenario(s: &ScenarioFile, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario_to_string(&s.normalize()?)?)?;
    Ok(())
}
