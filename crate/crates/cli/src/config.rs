//! Experiment configuration files (TOML).
//!
//! ```toml
//! [model]
//! omega_tau = 0.7853981633974483
//! g_tilde = 5.0
//! cavity = "coherent"        # or "number_one"
//! alpha_mod = 1.0            # coherent only
//! gamma = 3.141592653589793  # coherent only
//!
//! [state]
//! p0 = 0.1
//! x0 = 0.0
//! dp0 = 0.2
//! dx0 = 5.0
//! pi0 = 0.7071067811865476
//!
//! [n_values]                 # or: n_values = [0, 1, 2, 5]
//! start = 1
//! stop = 200                 # inclusive
//! step = 1
//!
//! [output]                   # optional
//! columns = ["P_exact", "Pi_exact"]
//!
//! [tolerances]               # optional
//! abs = 1e-12
//! rel = 1e-10
//!
//! [peak]                     # optional
//! reference_n = 10
//! ```
//!
//! Every table rejects keys it does not know.

use std::fmt;
use std::path::Path;

use qdistill_core::cavity::{CavityState, GaussianParticleState, ModelParams};
use qdistill_core::quadrature::{Tolerance, DEFAULT_ABS_TOL, DEFAULT_REL_TOL};
use serde::de::value::{MapAccessDeserializer, SeqAccessDeserializer};
use serde::de::{MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

/// CSV columns in output order.
pub const COLUMNS: [&str; 8] = ["N", "P_exact", "Pi_exact", "P_asym", "Pi_asym", "Delta_N", "P_closed", "Pi_closed"];

pub const DEFAULT_REFERENCE_N: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cavity {
    Coherent,
    NumberOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub omega_tau: f64,
    pub g_tilde: f64,
    pub cavity: Cavity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_mod: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub p0: f64,
    pub x0: f64,
    pub dp0: f64,
    pub dx0: f64,
    pub pi0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NRange {
    pub start: u32,
    pub stop: u32,
    #[serde(default = "one")]
    pub step: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum NValues {
    List(Vec<u32>),
    Range(NRange),
}

// Hand-written so that errors inside a range table (unknown or missing keys)
// reach the user instead of serde's generic "no variant matched".
impl<'de> Deserialize<'de> for NValues {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;

        impl<'de> Visitor<'de> for V {
            type Value = NValues;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a list of measurement counts or a {start, stop, step} table")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, seq: A) -> Result<NValues, A::Error> {
                Vec::deserialize(SeqAccessDeserializer::new(seq)).map(NValues::List)
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<NValues, A::Error> {
                NRange::deserialize(MapAccessDeserializer::new(map)).map(NValues::Range)
            }
        }

        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub columns: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            columns: COLUMNS[1..].iter().map(|c| c.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default = "default_abs")]
    pub abs: f64,
    #[serde(default = "default_rel")]
    pub rel: f64,
}

fn default_abs() -> f64 {
    DEFAULT_ABS_TOL
}

fn default_rel() -> f64 {
    DEFAULT_REL_TOL
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self {
            abs: DEFAULT_ABS_TOL,
            rel: DEFAULT_REL_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakSection {
    #[serde(default = "default_reference_n")]
    pub reference_n: u32,
}

fn default_reference_n() -> u32 {
    DEFAULT_REFERENCE_N
}

impl Default for PeakSection {
    fn default() -> Self {
        Self {
            reference_n: DEFAULT_REFERENCE_N,
        }
    }
}

/// Raw file contents. Optional tables are filled with their defaults, so a
/// serialized `ExperimentConfig` is the effective configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub state: StateSection,
    pub n_values: NValues,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub peak: PeakSection,
}

/// A parsed and checked configuration, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub params: ModelParams,
    pub state: GaussianParticleState,
    pub n_values: Vec<u32>,
    /// Indices into [`COLUMNS`], always starting with `N`.
    pub columns: Vec<usize>,
    pub tolerance: Tolerance,
    pub reference_n: u32,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        Self::from_config(ExperimentConfig::parse(text)?)
    }

    pub fn from_config(config: ExperimentConfig) -> Result<Self, ConfigError> {
        let m = &config.model;
        let cavity = match m.cavity {
            Cavity::Coherent => CavityState::Coherent {
                alpha_mod: m.alpha_mod.ok_or_else(|| missing("model.alpha_mod"))?,
                gamma: m.gamma.ok_or_else(|| missing("model.gamma"))?,
            },
            Cavity::NumberOne => {
                if m.alpha_mod.is_some() {
                    return Err(unused("model.alpha_mod"));
                }
                if m.gamma.is_some() {
                    return Err(unused("model.gamma"));
                }
                CavityState::NumberOne
            }
        };
        let params = ModelParams::new(m.omega_tau, m.g_tilde, cavity).map_err(|e| ConfigError(format!("model: {e}")))?;

        let s = &config.state;
        let state = GaussianParticleState::new(s.p0, s.x0, s.dp0, s.dx0, s.pi0)
            .map_err(|e| ConfigError(format!("state: {e}")))?;

        let n_values = expand_n_values(&config.n_values)?;

        let mut columns = vec![0];
        for name in &config.output.columns {
            match COLUMNS.iter().position(|c| c == name) {
                Some(0) => {}
                Some(i) if !columns.contains(&i) => columns.push(i),
                Some(_) => return Err(ConfigError(format!("output.columns: `{name}` listed twice"))),
                None => {
                    return Err(ConfigError(format!(
                        "output.columns: unknown column `{name}`, expected one of {}",
                        COLUMNS.join(", ")
                    )))
                }
            }
        }
        columns.sort_unstable();

        let tolerance = Tolerance::new(config.tolerances.abs, config.tolerances.rel)
            .map_err(|e| ConfigError(format!("tolerances: {e}")))?;

        let reference_n = config.peak.reference_n;
        if reference_n == 0 {
            return Err(ConfigError("peak.reference_n must be at least 1".into()));
        }

        Ok(Self {
            config,
            params,
            state,
            n_values,
            columns,
            tolerance,
            reference_n,
        })
    }
}

fn missing(key: &str) -> ConfigError {
    ConfigError(format!("{key} is required for a coherent cavity"))
}

fn unused(key: &str) -> ConfigError {
    ConfigError(format!("{key} is not used by the number_one cavity"))
}

fn expand_n_values(n: &NValues) -> Result<Vec<u32>, ConfigError> {
    let values = match n {
        NValues::List(v) => v.clone(),
        NValues::Range(r) => {
            if r.step == 0 {
                return Err(ConfigError("n_values.step must be positive".into()));
            }
            if r.stop < r.start {
                return Err(ConfigError(format!("n_values.stop ({}) is below start ({})", r.stop, r.start)));
            }
            (r.start..=r.stop).step_by(r.step as usize).collect()
        }
    };
    if values.is_empty() {
        return Err(ConfigError("n_values is empty".into()));
    }
    if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
        return Err(ConfigError(format!(
            "n_values must be strictly increasing ({} is followed by {})",
            w[0], w[1]
        )));
    }
    Ok(values)
}
