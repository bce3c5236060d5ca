//! Turns a [`RunConfig`] into a played game.

use std::path::Path;
use std::sync::Arc;

use infoseek_core::agent::{ExternalCaptain, ScriptedCaptain};
use infoseek_core::engine::{run_game, sample_truth, GameSetup};
use infoseek_core::guesswho::{
    run_guesswho, sample_target, Entity, EntitySpotter, ExternalGuesser, GuessTrajectory, GuessWhoSetup, Roster,
    ScriptedGuesser,
};
use infoseek_core::{Board, BoardConfig, SpotterChannel, Trajectory};

use crate::config::{AgentKind, ConfigError, RunConfig, SpotterKind};
use crate::formats::{self, FormatError};
use crate::llm::{AdapterError, Cassette, ChatBackend, HttpBackend, LlmCaptain, LlmGuesser, LlmSpotter, ModelClient, RateLimiter};

const ROSTER_100: &str = include_str!("../fixtures/roster_100.json");
const ROSTER_CLASSIC: &str = include_str!("../fixtures/roster_classic24.json");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad input from the user: configuration, files, names.
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{0}")]
    Usage(String),
    /// Failure while the game was running.
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}

impl RunError {
    pub fn is_user_error(&self) -> bool {
        !matches!(self, RunError::Runtime(_))
    }
}

/// Process-wide resources shared by every game.
#[derive(Clone, Default)]
pub struct Session {
    limiter: Option<Arc<RateLimiter>>,
}

impl Session {
    pub fn new(run: &RunConfig) -> Self {
        Session { limiter: run.endpoint.requests_per_second.filter(|r| *r > 0.0).map(|r| Arc::new(RateLimiter::new(r))) }
    }

    /// The cassette when one is configured, otherwise the HTTP endpoint.
    pub fn backend(&self, run: &RunConfig) -> Result<Arc<dyn ChatBackend>, RunError> {
        Ok(match &run.cassette {
            Some(path) => Arc::new(Cassette::replay_from(path)?),
            None => Arc::new(HttpBackend::new(&run.endpoint, self.limiter.clone())?),
        })
    }

    fn client(&self, run: &RunConfig) -> Result<ModelClient, RunError> {
        let mut c = ModelClient::new(self.backend(run)?, &run.endpoint);
        c.chain_of_thought = run.chain_of_thought;
        Ok(c)
    }
}

/// The hidden board, its configuration and identifier.
pub fn prepare_board(run: &RunConfig) -> Result<(Board, BoardConfig, String), RunError> {
    match &run.board_file {
        Some(path) => {
            let board = formats::read_board(path)?;
            let config = run.board_config(Some(&board));
            board.check(&config).map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))?;
            let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((board, config, id))
        }
        None => {
            let config = run.board_config(None);
            let seeds = run.seeds();
            let board = sample_truth(&config, seeds.board).map_err(|e| RunError::Runtime(e.to_string()))?;
            Ok((board, config, board_id_for_seed(seeds.board)))
        }
    }
}

pub fn board_id_for_seed(seed: u64) -> String {
    format!("seed-{seed:016x}")
}

/// Plays one Battleship game. `human` drives external hooks when the captain
/// kind is [`AgentKind::Human`].
pub fn play_battleship(
    run: &RunConfig,
    session: &Session,
    human: Option<&mut dyn ExternalCaptain>,
) -> Result<Trajectory, RunError> {
    run.validate()?;
    let policy = run.captain_policy()?;
    let (truth, config, board_id) = prepare_board(run)?;
    let seeds = run.seeds();
    let mut spotter = match run.spotter {
        SpotterKind::Oracle => SpotterChannel::Oracle,
        SpotterKind::Noisy => {
            SpotterChannel::noisy(run.channel_epsilon).map_err(|e| RunError::Usage(e.to_string()))?
        }
        SpotterKind::Llm => SpotterChannel::External {
            agent: Box::new(LlmSpotter::new(session.client(run)?, config.clone())),
            fallback_to_oracle: true,
        },
    };
    let mut scripted;
    let mut model;
    let agent: Option<&mut dyn ExternalCaptain> = if !policy.uses_external() {
        None
    } else {
        match run.captain {
            AgentKind::Scripted => {
                scripted = ScriptedCaptain::new(seeds.captain);
                Some(&mut scripted)
            }
            AgentKind::Llm => {
                model = LlmCaptain::new(session.client(run)?);
                Some(&mut model)
            }
            AgentKind::Human => {
                Some(human.ok_or_else(|| RunError::Usage("a human captain needs --interactive".into()))?)
            }
        }
    };
    let setup = GameSetup { config: &config, truth, board_id, policy: &policy, seeds, options: run.run_options() };
    run_game(setup, &mut spotter, agent).map_err(|e| RunError::Runtime(e.to_string()))
}

pub fn parse_roster(text: &str, origin: &str) -> Result<Roster, RunError> {
    let entities: Vec<Entity> =
        serde_json::from_str(text).map_err(|e| RunError::Usage(format!("{origin}: {e}")))?;
    Roster::new(entities).map_err(|e| RunError::Usage(format!("{origin}: {e}")))
}

/// Named bundled roster (`100`, `classic`) or a JSON file.
pub fn load_roster(spec: Option<&Path>) -> Result<Roster, RunError> {
    match spec.map(|p| p.to_string_lossy().into_owned()).as_deref() {
        None | Some("100") => parse_roster(ROSTER_100, "bundled 100-entity roster"),
        Some("classic") => parse_roster(ROSTER_CLASSIC, "bundled classic roster"),
        Some(_) => {
            let path = spec.unwrap_or(Path::new(""));
            parse_roster(&formats::read_text(path)?, &path.display().to_string())
        }
    }
}

pub fn play_guesswho(run: &RunConfig, session: &Session, roster: &Roster) -> Result<GuessTrajectory, RunError> {
    run.validate()?;
    let policy = run.guess_policy()?;
    let seeds = run.seeds();
    let target = match &run.target {
        Some(name) => roster
            .index_of(name)
            .ok_or_else(|| RunError::Usage(format!("target '{name}' is not on the roster")))?,
        None => sample_target(roster, seeds.board),
    };
    let spotter = match run.spotter {
        SpotterKind::Oracle => EntitySpotter::Oracle,
        SpotterKind::Noisy => EntitySpotter::Noisy { epsilon: run.channel_epsilon },
        SpotterKind::Llm => return Err(RunError::Usage("Guess Who supports oracle and noisy spotters only".into())),
    };
    let external = policy.question == infoseek_core::guesswho::GwQuestionRule::External
        || policy.guess == infoseek_core::guesswho::GwGuessRule::External;
    let mut scripted;
    let mut model;
    let agent: Option<&mut dyn ExternalGuesser> = if !external {
        None
    } else {
        match run.captain {
            AgentKind::Scripted => {
                scripted = ScriptedGuesser::new(seeds.captain);
                Some(&mut scripted)
            }
            AgentKind::Llm => {
                model = LlmGuesser::new(session.client(run)?, run.guess_budget);
                Some(&mut model)
            }
            AgentKind::Human => return Err(RunError::Usage("Guess Who has no interactive mode".into())),
        }
    };
    let setup = GuessWhoSetup {
        roster,
        target,
        policy: &policy,
        budget: run.guess_budget,
        belief_epsilon: run.belief_epsilon,
        seeds,
    };
    run_guesswho(setup, spotter, agent).map_err(|e| RunError::Runtime(e.to_string()))
}
