//! Experiment configuration: TOML file values overlaid by command-line flags.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use hpsro_core::{Algorithm, Error, InitialPolicy, RunConfig, TeamGame};

use crate::failure::Failure;

/// Contents of a `--config` file. Every key is optional; flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfigFile {
    /// Built-in game name.
    pub builtin: Option<String>,
    /// Game file path, relative to the config file.
    pub game_file: Option<PathBuf>,
    pub algo: Option<String>,
    pub iters: Option<usize>,
    pub br_gap: Option<f64>,
    pub init: Option<String>,
    pub record_trajectories: Option<bool>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub bro: BroSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BroSection {
    pub max_sweeps: Option<usize>,
    pub restarts: Option<usize>,
    pub improvement_tolerance: Option<f64>,
    pub permutation_seed: Option<u64>,
    pub shared_grid_points: Option<usize>,
    pub shared_refinement_tolerance: Option<f64>,
    pub exact_mode_threshold: Option<usize>,
}

impl ExperimentConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, &e))?;
        let mut file: ExperimentConfigFile = toml::from_str(&text).map_err(|e| {
            let message = e.message().replace('\n', " ");
            Failure::config(&format!("config {}: {message}", path.display()))
        })?;
        if let Some(rel) = &file.game_file {
            if rel.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                file.game_file = Some(base.join(rel));
            }
        }
        Ok(file)
    }

    pub fn game_source(&self) -> Result<Option<GameSource>, Failure> {
        match (&self.builtin, &self.game_file) {
            (Some(_), Some(_)) => Err(Failure::from_core(config_error(
                "game",
                "config file names both `builtin` and `game_file`",
            ))),
            (Some(name), None) => Ok(Some(GameSource::Builtin(name.clone()))),
            (None, Some(path)) => Ok(Some(GameSource::File(path.clone()))),
            (None, None) => Ok(None),
        }
    }

    /// Distinct seeds in file order.
    pub fn checked_seeds(&self) -> Result<Vec<u64>, Failure> {
        let mut seen = HashSet::new();
        for s in &self.seeds {
            if !seen.insert(*s) {
                return Err(Failure::from_core(config_error("seeds", format!("seed {s} is listed twice"))));
            }
        }
        Ok(self.seeds.clone())
    }
}

pub fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameSource {
    Builtin(String),
    File(PathBuf),
}

impl GameSource {
    /// Built-in names take precedence over same-named files.
    pub fn from_flag(value: &str) -> Self {
        if hpsro_core::games::builtin_names().contains(&value) {
            GameSource::Builtin(value.to_string())
        } else {
            GameSource::File(PathBuf::from(value))
        }
    }

    pub fn load(&self) -> Result<TeamGame, Failure> {
        match self {
            GameSource::Builtin(name) => hpsro_core::games::builtin(name).ok_or_else(|| {
                Failure::from_core(config_error(
                    "game",
                    format!(
                        "unknown built-in game `{name}` (known: {})",
                        hpsro_core::games::builtin_names().join(", ")
                    ),
                ))
            }),
            GameSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, &e))?;
                hpsro_core::format::parse_game(&text).map_err(|e| Failure::game_file(path, e))
            }
        }
    }

    /// Name used in default output paths.
    pub fn stem(&self) -> String {
        match self {
            GameSource::Builtin(name) => name.clone(),
            GameSource::File(path) => path
                .file_stem()
                .map_or_else(|| "game".to_string(), |s| s.to_string_lossy().into_owned()),
        }
    }
}

/// `auto`, `uniform` or `shared:K`.
pub fn parse_init(value: &str) -> Result<InitialPolicy, Error> {
    match value {
        "auto" => Ok(InitialPolicy::Auto),
        "uniform" => Ok(InitialPolicy::Uniform),
        other => other
            .strip_prefix("shared:")
            .and_then(|k| k.parse().ok())
            .map(InitialPolicy::SharedPure)
            .ok_or_else(|| config_error("init", format!("expected auto, uniform or shared:K, got `{other}`"))),
    }
}

/// Flag values for `run`; `None` falls back to the config file, then to the
/// library defaults.
#[derive(Debug, Default, Clone)]
pub struct RunOverrides {
    pub algo: Option<String>,
    pub iters: Option<usize>,
    pub br_gap: Option<f64>,
    pub restarts: Option<usize>,
    pub init: Option<String>,
}

pub fn build_run_config(
    file: &ExperimentConfigFile,
    flags: &RunOverrides,
    seed: u64,
) -> Result<RunConfig, Error> {
    let algo_name = flags
        .algo
        .as_deref()
        .or(file.algo.as_deref())
        .ok_or_else(|| config_error("algo", "no algorithm given (use --algo)"))?;
    let algorithm: Algorithm = algo_name.parse()?;
    let mut config = RunConfig::new(algorithm);
    config.seed = seed;
    if let Some(n) = flags.iters.or(file.iters) {
        config.max_iterations = n;
    }
    if let Some(g) = flags.br_gap.or(file.br_gap) {
        config.br_gap_tolerance = g;
    }
    if let Some(r) = file.record_trajectories {
        config.record_trajectories = r;
    }
    let b = &file.bro;
    let bro = &mut config.bro;
    if let Some(v) = b.max_sweeps {
        bro.max_sweeps = v;
    }
    if let Some(v) = flags.restarts.or(b.restarts) {
        bro.restarts = v;
    }
    if let Some(v) = b.improvement_tolerance {
        bro.improvement_tolerance = v;
    }
    if let Some(v) = b.permutation_seed {
        bro.permutation_seed = v;
    }
    if let Some(v) = b.shared_grid_points {
        bro.shared_grid_points = v;
    }
    if let Some(v) = b.shared_refinement_tolerance {
        bro.shared_refinement_tolerance = v;
    }
    if let Some(v) = b.exact_mode_threshold {
        bro.exact_mode_threshold = v;
    }
    let init = flags.init.as_deref().or(file.init.as_deref()).unwrap_or("auto");
    config.initial = parse_init(init)?;
    config.validate()?;
    Ok(config)
}
