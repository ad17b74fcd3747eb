//! The run configuration document: one TOML file holding everything a
//! command needs. Unknown keys are rejected so hyperparameter typos fail
//! loudly, and every run writes back a fully materialized snapshot that can
//! be fed to `--config` to reproduce the run.

use serde::{Deserialize, Serialize};

use gripsim::envs::{EnvConfig, EnvKind, ForceMode};
use gripsim::pi::PiGains;
use gripsim::sim::SimConfig;
use gripsim::tactile::SensorModel;
use gripsim::td3::Td3Config;

/// Top-level config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Base directory for run outputs (a fresh run id is appended unless
    /// `--out` is given).
    pub out_dir: String,
    /// Seed list; most commands use the first entry as master seed.
    pub seeds: Vec<u64>,
    pub env: EnvSection,
    /// Simulation override; when absent, the env kind's defaults apply.
    pub sim: Option<SimConfig>,
    pub sensor: SensorModel,
    pub pi: PiGains,
    pub td3: Td3Config,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out_dir: "out".to_string(),
            seeds: vec![0, 1, 2, 3, 4],
            env: EnvSection::default(),
            sim: None,
            sensor: SensorModel::default(),
            pi: PiGains::default(),
            td3: Td3Config::default(),
        }
    }
}

/// Environment-level settings (the simulation and sensor live in their own
/// sections).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvSection {
    pub kind: EnvKind,
    pub f_goal: f64,
    pub episode_length: u32,
    pub force_mode: ForceMode,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self {
            kind: EnvKind::GripperTactile,
            f_goal: 1.0,
            episode_length: 300,
            force_mode: ForceMode::Raw,
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub no_noise: bool,
    pub force_mode: Option<ForceMode>,
    pub env_kind: Option<EnvKind>,
    pub total_timesteps: Option<u64>,
}

impl RunConfig {
    /// Parse a strict TOML document.
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Apply CLI overrides and fill every defaulted field, so the result
    /// serializes into a complete snapshot.
    pub fn materialize(mut self, overrides: &Overrides) -> Self {
        if let Some(kind) = overrides.env_kind {
            if self.env.kind != kind {
                self.env.kind = kind;
                // An explicit [sim] section written for another kind would be
                // rejected by validation anyway; replacing the kind drops it
                // in favor of the new kind's defaults.
                self.sim = None;
            }
        }
        if self.sim.is_none() {
            self.sim = Some(self.env.kind.default_sim());
        }
        if let Some(seed) = overrides.seed {
            self.seeds = vec![seed];
        }
        if self.seeds.is_empty() {
            self.seeds = vec![0];
        }
        if overrides.no_noise {
            self.sensor.noise_enabled = false;
        }
        if let Some(mode) = overrides.force_mode {
            self.env.force_mode = mode;
        }
        if let Some(steps) = overrides.total_timesteps {
            self.td3.total_timesteps = steps;
        }
        self
    }

    /// The environment config assembled from the materialized sections.
    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            kind: self.env.kind,
            f_goal: self.env.f_goal,
            episode_length: self.env.episode_length,
            force_mode: self.env.force_mode,
            sim: self.sim.clone().unwrap_or_else(|| self.env.kind.default_sim()),
            sensor: self.sensor.clone(),
            seed: self.master_seed(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.seeds.first().copied().unwrap_or(0)
    }

    /// Full TOML snapshot of a materialized config.
    pub fn to_snapshot(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
