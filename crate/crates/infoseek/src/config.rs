//! Run configuration. Values come from built-in defaults, then an optional
//! TOML file, then command-line flags, each layer overriding the previous.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use infoseek_core::engine::GameSeeds;
use infoseek_core::guesswho::GuessPolicy;
use infoseek_core::strategy::{QuestionSource, DEFAULT_CANDIDATES, PRESETS};
use infoseek_core::{BoardConfig, CaptainPolicy, RunOptions};

use crate::llm::EndpointConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Toml { path: PathBuf, source: toml::de::Error },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Env {
    Battleship,
    Guesswho,
}

/// Who answers questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpotterKind {
    /// Always truthful.
    Oracle,
    /// Truthful answers flipped with probability `channel_epsilon`.
    Noisy,
    /// A chat model, falling back to the oracle on failure.
    Llm,
}

/// What drives the external hooks of `lm`-style policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    /// Seeded model-free stand-in.
    Scripted,
    /// A chat model through the configured endpoint.
    Llm,
    /// A person at the terminal.
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    Templates,
    External,
    Mixed,
}

impl From<SourceKind> for QuestionSource {
    fn from(s: SourceKind) -> Self {
        match s {
            SourceKind::Templates => QuestionSource::Templates,
            SourceKind::External => QuestionSource::External,
            SourceKind::Mixed => QuestionSource::Mixed,
        }
    }
}

/// Everything needed to reproduce one game. Embedded in every trajectory
/// header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub env: Env,
    pub policy: String,
    /// Lookahead discount, [0, 1]; only for lookahead policies.
    pub gamma: Option<f64>,
    /// Candidate questions per EIG selection, 1..=1000.
    pub k: Option<usize>,
    pub source: SourceKind,
    /// Particle count, 1..=1_000_000.
    pub particles: usize,
    /// The captain's model of answer noise, [0, 0.5].
    pub belief_epsilon: f64,
    pub spotter: SpotterKind,
    /// Flip rate of the noisy spotter, [0, 0.5].
    pub channel_epsilon: f64,
    pub seed: u64,
    /// Overrides the board seed derived from `seed`.
    pub board_seed: Option<u64>,
    /// A fixed `.board` file instead of a sampled board.
    pub board_file: Option<PathBuf>,
    pub question_budget: Option<u32>,
    pub move_budget: Option<u32>,
    pub captain: AgentKind,
    pub endpoint: EndpointConfig,
    pub chain_of_thought: bool,
    /// Replay model calls from this cassette instead of the network.
    pub cassette: Option<PathBuf>,
    pub snapshots: bool,
    pub shadow_belief: bool,
    /// Guess Who roster JSON; the bundled 100-entity roster when unset.
    pub roster: Option<PathBuf>,
    /// Guess Who target name; drawn from the board seed when unset.
    pub target: Option<String>,
    /// Guess Who question budget.
    pub guess_budget: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opts = RunOptions::default();
        RunConfig {
            env: Env::Battleship,
            policy: "bayes-qmd".into(),
            gamma: None,
            k: None,
            source: SourceKind::Templates,
            particles: opts.particles,
            belief_epsilon: opts.belief_epsilon,
            spotter: SpotterKind::Noisy,
            channel_epsilon: 0.1,
            seed: 0,
            board_seed: None,
            board_file: None,
            question_budget: None,
            move_budget: None,
            captain: AgentKind::Scripted,
            endpoint: EndpointConfig::default(),
            chain_of_thought: false,
            cassette: None,
            snapshots: false,
            shadow_belief: opts.shadow_belief,
            roster: None,
            target: None,
            guess_budget: 8,
        }
    }
}

impl RunConfig {
    /// Defaults overlaid with `path` when given.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.into(), source })?;
                toml::from_str(&text).map_err(|source| ConfigError::Toml { path: p.into(), source })
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit_half = |name: &str, v: f64| {
            if (0.0..=0.5).contains(&v) {
                Ok(())
            } else {
                Err(invalid(format!("{name} must lie in [0, 0.5], got {v}")))
            }
        };
        unit_half("belief_epsilon", self.belief_epsilon)?;
        unit_half("channel_epsilon", self.channel_epsilon)?;
        if !(1..=1_000_000).contains(&self.particles) {
            return Err(invalid(format!("particles must lie in 1..=1000000, got {}", self.particles)));
        }
        if let Some(g) = self.gamma {
            if !(0.0..=1.0).contains(&g) {
                return Err(invalid(format!("gamma must lie in [0, 1], got {g}")));
            }
        }
        if let Some(k) = self.k {
            if !(1..=1000).contains(&k) {
                return Err(invalid(format!("k must lie in 1..=1000, got {k}")));
            }
        }
        match self.env {
            Env::Battleship => {
                self.captain_policy()?;
                let cfg = self.base_board_config();
                if let Some(m) = self.move_budget {
                    if m == 0 || m as usize > cfg.cells() {
                        return Err(invalid(format!("move_budget must lie in 1..={}, got {m}", cfg.cells())));
                    }
                }
                if self.question_budget.is_some_and(|q| q > 1000) {
                    return Err(invalid("question_budget must be at most 1000"));
                }
            }
            Env::Guesswho => {
                self.guess_policy()?;
                if self.guess_budget > 1000 {
                    return Err(invalid("guess_budget must be at most 1000"));
                }
            }
        }
        Ok(())
    }

    pub fn captain_policy(&self) -> Result<CaptainPolicy, ConfigError> {
        let mut p = CaptainPolicy::preset(&self.policy).map_err(|_| {
            invalid(format!("unknown policy '{}' (expected one of {})", self.policy, PRESETS.join(", ")))
        })?;
        if let Some(g) = self.gamma {
            p = p.with_gamma(g);
        }
        p = p.with_k(self.k.unwrap_or(DEFAULT_CANDIDATES)).with_source(self.source.into());
        p.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(p)
    }

    pub fn guess_policy(&self) -> Result<GuessPolicy, ConfigError> {
        GuessPolicy::preset(&self.policy).ok_or_else(|| {
            invalid(format!(
                "unknown Guess Who policy '{}' (expected one of {})",
                self.policy,
                infoseek_core::guesswho::GW_PRESETS.join(", ")
            ))
        })
    }

    fn base_board_config(&self) -> BoardConfig {
        let mut cfg = BoardConfig::default();
        if let Some(q) = self.question_budget {
            cfg.question_budget = q;
        }
        if let Some(m) = self.move_budget {
            cfg.move_budget = m;
        }
        cfg
    }

    /// Default fleet and grid (or the one implied by `board`), with budget
    /// overrides applied.
    pub fn board_config(&self, board: Option<&infoseek_core::Board>) -> BoardConfig {
        let mut cfg = match board {
            Some(b) => crate::formats::config_for_board(b),
            None => BoardConfig::default(),
        };
        if let Some(q) = self.question_budget {
            cfg.question_budget = q;
        }
        if let Some(m) = self.move_budget {
            cfg.move_budget = m;
        }
        cfg
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            particles: self.particles,
            belief_epsilon: self.belief_epsilon,
            snapshots: self.snapshots,
            shadow_belief: self.shadow_belief,
        }
    }

    pub fn seeds(&self) -> GameSeeds {
        let mut s = GameSeeds::from_seed(self.seed);
        if let Some(b) = self.board_seed {
            s.board = b;
        }
        s
    }
}

/// A policy × board × seed grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TournamentConfig {
    pub policies: Vec<String>,
    /// Number of sampled boards (ignored with `board_dir`).
    pub boards: usize,
    pub board_dir: Option<PathBuf>,
    /// Seeds per board.
    pub seeds: usize,
    /// Root of all derived board and game seeds.
    pub base_seed: u64,
    /// Worker threads; 0 means one per logical core.
    pub workers: usize,
    /// Settings shared by every game; `policy` and `seed` are filled per game.
    pub run: RunConfig,
}

impl Default for TournamentConfig {
    fn default() -> Self {
        TournamentConfig {
            policies: vec!["random".into(), "greedy".into(), "bayes-qmd".into()],
            boards: 18,
            board_dir: None,
            seeds: 3,
            base_seed: 0,
            workers: 0,
            run: RunConfig::default(),
        }
    }
}

impl TournamentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(TournamentConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.into(), source })?;
                toml::from_str(&text).map_err(|source| ConfigError::Toml { path: p.into(), source })
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.policies.is_empty() {
            return Err(invalid("at least one policy is required"));
        }
        if self.seeds == 0 {
            return Err(invalid("seeds must be at least 1"));
        }
        if self.board_dir.is_none() && self.boards == 0 {
            return Err(invalid("boards must be at least 1"));
        }
        for p in &self.policies {
            RunConfig { policy: p.clone(), ..self.run.clone() }.validate()?;
        }
        Ok(())
    }
}

/// Deterministic 64-bit mix of a root seed and grid indices.
pub fn derive_seed(root: u64, parts: &[u64]) -> u64 {
    let mut s = root;
    for &p in parts {
        s = GameSeeds::from_seed(s ^ p.wrapping_mul(0xA076_1D64_78BD_642F)).captain;
    }
    s
}
