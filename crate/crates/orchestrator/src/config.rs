//! Service configuration: TOML file plus `ARENA_*` environment overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::OrchestratorError;

/// Endpoint value selecting the in-process baseline agent.
pub const LOCAL_ENDPOINT: &str = "local";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TurnLimits {
    pub max_actions_per_turn: u32,
    pub max_failures_per_turn: u32,
    pub inference_deadline_ms: u64,
    pub max_inference_rounds_per_turn: u32,
}

impl Default for TurnLimits {
    fn default() -> Self {
        Self {
            max_actions_per_turn: 50,
            max_failures_per_turn: 10,
            inference_deadline_ms: 10_000,
            max_inference_rounds_per_turn: 10,
        }
    }
}

impl TurnLimits {
    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if self.max_actions_per_turn == 0
            || self.max_failures_per_turn == 0
            || self.inference_deadline_ms == 0
            || self.max_inference_rounds_per_turn == 0
        {
            return Err(OrchestratorError::Config(
                "turn limits must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn deadline(&self) -> Duration {
        Duration::from_millis(self.inference_deadline_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TeamConfig {
    /// Service root URL, or `local`.
    pub endpoint: String,
}

impl Default for TeamConfig {
    fn default() -> Self {
        Self {
            endpoint: LOCAL_ENDPOINT.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub bind: String,
    pub classes: PathBuf,
    pub scenes: PathBuf,
    pub catalog: PathBuf,
    pub data_dir: PathBuf,
    /// Defaults to `records.ndjson` under the data directory.
    pub metrics: Option<PathBuf>,
    pub default_team: String,
    pub teams: BTreeMap<String, TeamConfig>,
    pub max_sessions: usize,
    pub idle_timeout_secs: u64,
    pub limits: TurnLimits,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            classes: "fixtures/classes.json".into(),
            scenes: "fixtures/scenes".into(),
            catalog: "fixtures/missions".into(),
            data_dir: "var/arena".into(),
            metrics: None,
            default_team: "baseline".into(),
            teams: BTreeMap::from([("baseline".to_string(), TeamConfig::default())]),
            max_sessions: 64,
            idle_timeout_secs: 15 * 60,
            limits: TurnLimits::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, OrchestratorError> {
    v.parse()
        .map_err(|_| OrchestratorError::Config(format!("{key}: cannot parse {v:?}")))
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, OrchestratorError> {
        toml::from_str(text).map_err(|e| OrchestratorError::Config(e.to_string()))
    }

    /// Reads the file, resolves relative paths against its directory and
    /// applies the process environment.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, OrchestratorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_relative(dir);
        }
        cfg.apply_env(std::env::vars())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_relative(&mut self, base: &Path) {
        for p in [
            &mut self.classes,
            &mut self.scenes,
            &mut self.catalog,
            &mut self.data_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(m) = self.metrics.as_mut().filter(|m| m.is_relative()) {
            *m = base.join(&*m);
        }
    }

    /// Applies `ARENA_*` variables. `ARENA_TEAMS` is `name=endpoint,...`;
    /// `ARENA_ENDPOINT` sets the default team's endpoint.
    pub fn apply_env(
        &mut self,
        vars: impl IntoIterator<Item = (String, String)>,
    ) -> Result<(), OrchestratorError> {
        let vars: BTreeMap<String, String> = vars
            .into_iter()
            .filter(|(k, _)| k.starts_with("ARENA_"))
            .collect();
        for (k, v) in &vars {
            match k.as_str() {
                "ARENA_BIND" => self.bind = v.clone(),
                "ARENA_CLASSES" => self.classes = v.into(),
                "ARENA_SCENES" => self.scenes = v.into(),
                "ARENA_CATALOG" => self.catalog = v.into(),
                "ARENA_DATA_DIR" => self.data_dir = v.into(),
                "ARENA_METRICS" => self.metrics = Some(v.into()),
                "ARENA_DEFAULT_TEAM" => self.default_team = v.clone(),
                "ARENA_MAX_SESSIONS" => self.max_sessions = parse(k, v)?,
                "ARENA_IDLE_TIMEOUT_SECS" => self.idle_timeout_secs = parse(k, v)?,
                "ARENA_MAX_ACTIONS_PER_TURN" => self.limits.max_actions_per_turn = parse(k, v)?,
                "ARENA_MAX_FAILURES_PER_TURN" => self.limits.max_failures_per_turn = parse(k, v)?,
                "ARENA_INFERENCE_DEADLINE_MS" => self.limits.inference_deadline_ms = parse(k, v)?,
                "ARENA_MAX_INFERENCE_ROUNDS" => {
                    self.limits.max_inference_rounds_per_turn = parse(k, v)?
                }
                "ARENA_TEAMS" => {
                    for pair in v.split(',').filter(|p| !p.trim().is_empty()) {
                        let (name, endpoint) = pair.split_once('=').ok_or_else(|| {
                            OrchestratorError::Config(format!(
                                "{k}: expected name=endpoint, got {pair:?}"
                            ))
                        })?;
                        self.teams.insert(
                            name.trim().to_string(),
                            TeamConfig {
                                endpoint: endpoint.trim().to_string(),
                            },
                        );
                    }
                }
                _ => {}
            }
        }
        if let Some(ep) = vars.get("ARENA_ENDPOINT") {
            self.teams.insert(
                self.default_team.clone(),
                TeamConfig {
                    endpoint: ep.clone(),
                },
            );
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        self.limits.validate()?;
        if !self.teams.contains_key(&self.default_team) {
            return Err(OrchestratorError::Config(format!(
                "default team {} has no endpoint",
                self.default_team
            )));
        }
        if self.max_sessions == 0 || self.idle_timeout_secs == 0 {
            return Err(OrchestratorError::Config(
                "max_sessions and idle_timeout_secs must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn metrics_path(&self) -> PathBuf {
        self.metrics
            .clone()
            .unwrap_or_else(|| self.data_dir.join("records.ndjson"))
    }
}
