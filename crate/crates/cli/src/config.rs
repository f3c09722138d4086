//! Experiment configuration.
//!
//! Values are layered: built-in defaults, then the JSON config file, then
//! `QLM_*` environment variables, then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Mass parameter of the ambient manifold.
    pub mass: f64,
    pub bandlimit: usize,
    pub seed: u64,
    /// Must name the generator compiled into the binary.
    pub random_generator: String,
    /// `round <r0>`, `perturbed <r0> <amp> Y<l><m>` or `file <path>`.
    pub surface: String,
    /// `rotated` (a seeded rotation of the surface), `same`, or a surface spec.
    pub reference: String,
    /// `one`, `zero`, `random` or `random-positive`.
    pub speed: String,
    pub continuation: ContinuationConfig,
    pub lemma2: Lemma2Config,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationConfig {
    pub s_max: f64,
    pub steps: usize,
    /// Also run `-F`, for central differences of the mass.
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma2Config {
    pub s_max: f64,
    pub steps: usize,
    /// Size of the traceless offset in the synthetic check; 0 skips it.
    pub epsilon: f64,
    pub fd_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Residuals at or below this at both resolutions pass without decay.
    pub residual: f64,
    pub min_decay: f64,
    pub gauss_bonnet: f64,
    /// `|E'(0) - rhs|` relative to `∫ V H dσ`.
    pub lemma2: f64,
    pub first_order_relative: f64,
    pub drift_relative: f64,
    pub penrose_relative: f64,
    pub mean_curvature_floor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            mass: 1.0,
            bandlimit: 15,
            seed: 1,
            random_generator: qlm_core::random::GENERATOR.to_string(),
            surface: "perturbed 3 0.05 Y22".into(),
            reference: "rotated".into(),
            speed: "random-positive".into(),
            continuation: ContinuationConfig::default(),
            lemma2: Lemma2Config::default(),
            tolerances: Tolerances::default(),
            out: None,
        }
    }
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            s_max: 0.05,
            steps: 50,
            symmetric: false,
        }
    }
}

impl Default for Lemma2Config {
    fn default() -> Self {
        Lemma2Config {
            s_max: 0.01,
            steps: 8,
            epsilon: 0.05,
            fd_step: 1e-3,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-10,
            min_decay: 50.0,
            gauss_bonnet: 1e-8,
            lemma2: 1e-6,
            first_order_relative: 1e-3,
            drift_relative: 1e-7,
            penrose_relative: 1e-8,
            mean_curvature_floor: 1e-8,
        }
    }
}

/// Overrides from the environment or the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mass: Option<f64>,
    pub bandlimit: Option<usize>,
    pub seed: Option<u64>,
    pub surface: Option<String>,
    pub reference: Option<String>,
    pub speed: Option<String>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(v) = o.mass {
            self.mass = v;
        }
        if let Some(v) = o.bandlimit {
            self.bandlimit = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.surface {
            self.surface = v;
        }
        if let Some(v) = o.reference {
            self.reference = v;
        }
        if let Some(v) = o.speed {
            self.speed = v;
        }
        if let Some(v) = o.out {
            self.out = Some(v);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.bandlimit < 7 {
            return Err(CliError::config(
                "bandlimit",
                format!("must be at least 7, got {}", self.bandlimit),
            ));
        }
        if !(self.mass.is_finite() && self.mass >= 0.0) {
            return Err(CliError::config(
                "mass",
                format!("must be finite and non-negative, got {}", self.mass),
            ));
        }
        if self.random_generator != qlm_core::random::GENERATOR {
            return Err(CliError::config(
                "random_generator",
                format!(
                    "this build provides {:?}, config asks for {:?}",
                    qlm_core::random::GENERATOR,
                    self.random_generator
                ),
            ));
        }
        if !matches!(self.speed.as_str(), "one" | "zero" | "random" | "random-positive") {
            return Err(CliError::config("speed", format!("unknown speed {:?}", self.speed)));
        }
        let c = &self.continuation;
        positive("continuation.s_max", c.s_max)?;
        if c.steps == 0 {
            return Err(CliError::config("continuation.steps", "must be positive"));
        }
        let l = &self.lemma2;
        positive("lemma2.s_max", l.s_max)?;
        positive("lemma2.fd_step", l.fd_step)?;
        if l.steps < 5 {
            return Err(CliError::config(
                "lemma2.steps",
                format!("must be at least 5, got {}", l.steps),
            ));
        }
        if !(l.epsilon.is_finite() && l.epsilon >= 0.0) {
            return Err(CliError::config("lemma2.epsilon", "must be finite and non-negative"));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.residual", t.residual),
            ("tolerances.min_decay", t.min_decay),
            ("tolerances.gauss_bonnet", t.gauss_bonnet),
            ("tolerances.lemma2", t.lemma2),
            ("tolerances.first_order_relative", t.first_order_relative),
            ("tolerances.drift_relative", t.drift_relative),
            ("tolerances.penrose_relative", t.penrose_relative),
            ("tolerances.mean_curvature_floor", t.mean_curvature_floor),
        ] {
            positive(name, v)?;
        }
        Ok(())
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be positive, got {v}")))
    }
}
