//! The Battleship game loop: budgets, termination, belief synchronization and
//! trajectory recording.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::ExternalCaptain;
use crate::belief::{BeliefError, ParticleBelief, DEFAULT_EPSILON, DEFAULT_PARTICLES};
use crate::board::{reveal, sample_board, Board, BoardConfig, BoardError, PartialBoard};
use crate::cells::{Color, Coord};
use crate::question::Question;
use crate::spotter::{ChannelTag, SpotterChannel, SpotterError};
use crate::strategy::{
    decide, Action, Budgets, CaptainPolicy, Decision, StrategyError, TurnContext,
};

/// Trajectory schema version.
pub const TRAJECTORY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Event {
    Question {
        turn: u32,
        question: Question,
        eig: Option<f64>,
        p_yes: Option<f64>,
        p_hit: Option<f64>,
        expected_post_hit: Option<f64>,
    },
    Answer {
        turn: u32,
        value: bool,
        truth: bool,
        channel: ChannelTag,
    },
    Shot {
        turn: u32,
        coord: Coord,
        hit: bool,
        sunk: Option<Color>,
        p_hit: Option<f64>,
    },
    Fallback {
        turn: u32,
        reason: String,
    },
    /// Hit-probability grid before the turn's action, row-major.
    Snapshot {
        turn: u32,
        grid: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Running,
    Win,
    Loss,
    Error,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("game is already over")]
    Finished,
    #[error("no questions left")]
    NoQuestionsLeft,
    #[error("no moves left")]
    NoMovesLeft,
    #[error("tile {0} was already revealed")]
    AlreadyRevealed(Coord),
    #[error("tile {0} is off the board")]
    OutOfBounds(Coord),
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error(transparent)]
    Spotter(#[from] SpotterError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// Answer returned by [`GameState::step`] for an `Ask`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepResult {
    Answered { value: bool },
    Shot { hit: bool, sunk: Option<Color> },
}

#[derive(Debug, Clone)]
pub struct GameState {
    pub config: BoardConfig,
    pub truth: Board,
    pub partial: PartialBoard,
    pub questions_left: u32,
    pub moves_left: u32,
    pub events: Vec<Event>,
    pub outcome: Outcome,
    pub turn: u32,
}

impl GameState {
    pub fn new(config: BoardConfig, truth: Board) -> Self {
        let partial = PartialBoard::for_config(&config);
        GameState {
            questions_left: config.question_budget,
            moves_left: config.move_budget,
            config,
            truth,
            partial,
            events: Vec::new(),
            outcome: Outcome::Running,
            turn: 0,
        }
    }

    pub fn budgets(&self) -> Budgets {
        Budgets {
            questions_left: self.questions_left,
            moves_left: self.moves_left,
        }
    }

    pub fn is_done(&self) -> bool {
        self.outcome != Outcome::Running
    }

    pub fn all_sunk(&self) -> bool {
        self.truth.occupied().is_subset(self.partial.revealed())
    }

    /// Applies an action. Questions cost a question and never a move.
    pub fn step(
        &mut self,
        action: &Action,
        diagnostics: Option<&crate::strategy::Diagnostics>,
        spotter: &mut SpotterChannel,
        spotter_rng: &mut ChaCha8Rng,
    ) -> Result<StepResult, EngineError> {
        if self.is_done() {
            return Err(EngineError::Finished);
        }
        let result = match action {
            Action::Ask(q) => {
                if self.questions_left == 0 {
                    return Err(EngineError::NoQuestionsLeft);
                }
                let a = spotter.answer(q, &self.truth, &self.partial, spotter_rng)?;
                self.questions_left -= 1;
                self.events.push(Event::Question {
                    turn: self.turn,
                    question: q.clone(),
                    eig: diagnostics.and_then(|d| d.eig),
                    p_yes: diagnostics.and_then(|d| d.p_yes),
                    p_hit: diagnostics.and_then(|d| d.p_hit),
                    expected_post_hit: diagnostics.and_then(|d| d.expected_post_hit),
                });
                if let Some(reason) = a.fallback {
                    self.events.push(Event::Fallback {
                        turn: self.turn,
                        reason: format!("spotter: {reason}"),
                    });
                }
                self.events.push(Event::Answer {
                    turn: self.turn,
                    value: a.value,
                    truth: a.truth,
                    channel: a.channel,
                });
                StepResult::Answered { value: a.value }
            }
            Action::Fire(c) => {
                if self.moves_left == 0 {
                    return Err(EngineError::NoMovesLeft);
                }
                if !c.in_bounds(self.partial.rows(), self.partial.cols()) {
                    return Err(EngineError::OutOfBounds(*c));
                }
                if !self.partial.is_hidden(*c) {
                    return Err(EngineError::AlreadyRevealed(*c));
                }
                let r = reveal(&self.truth, &self.partial, *c)?;
                self.partial = r.partial;
                self.moves_left -= 1;
                self.events.push(Event::Shot {
                    turn: self.turn,
                    coord: *c,
                    hit: r.hit,
                    sunk: r.sunk,
                    p_hit: diagnostics.and_then(|d| d.p_hit),
                });
                if self.all_sunk() {
                    self.outcome = Outcome::Win;
                } else if self.moves_left == 0 {
                    self.outcome = Outcome::Loss;
                }
                StepResult::Shot {
                    hit: r.hit,
                    sunk: r.sunk,
                }
            }
        };
        self.turn += 1;
        Ok(result)
    }
}

/// Independent seeds for the hidden board, the captain and the spotter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSeeds {
    pub board: u64,
    pub captain: u64,
    pub spotter: u64,
}

impl GameSeeds {
    /// Spreads one seed into three decorrelated streams.
    pub fn from_seed(seed: u64) -> Self {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        GameSeeds {
            board: next(),
            captain: next(),
            spotter: next(),
        }
    }
}

/// Samples the hidden board for a seed.
pub fn sample_truth(config: &BoardConfig, board_seed: u64) -> Result<Board, BoardError> {
    sample_board(config, &mut ChaCha8Rng::seed_from_u64(board_seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub particles: usize,
    /// The captain's model of the spotter's noise.
    pub belief_epsilon: f64,
    /// Record the hit grid before every action.
    pub snapshots: bool,
    /// Keep a passive belief for captains that do not need one but can ask,
    /// so their questions can be scored.
    pub shadow_belief: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            particles: DEFAULT_PARTICLES,
            belief_epsilon: DEFAULT_EPSILON,
            snapshots: false,
            shadow_belief: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub v: u32,
    pub env: String,
    pub board_id: String,
    pub config: BoardConfig,
    pub seeds: GameSeeds,
    pub policy: CaptainPolicy,
    pub spotter: String,
    pub options: RunOptions,
    /// Whether question EIGs come from a belief the captain itself ignores.
    pub shadow_scored: bool,
    /// The hidden board in the text codec.
    pub truth: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub outcome: Outcome,
    pub moves_used: u32,
    pub questions_used: u32,
    pub hits: u32,
    pub ship_cells: u32,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub header: TrajectoryHeader,
    pub events: Vec<Event>,
    pub result: GameResult,
}

impl Trajectory {
    pub fn shots(&self) -> impl Iterator<Item = (Coord, bool)> + '_ {
        self.events.iter().filter_map(|e| match e {
            Event::Shot { coord, hit, .. } => Some((*coord, *hit)),
            _ => None,
        })
    }

    /// Recorded EIG of every asked question (`None` where unscored).
    pub fn question_eigs(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.events.iter().filter_map(|e| match e {
            Event::Question { eig, .. } => Some(*eig),
            _ => None,
        })
    }
}

pub fn spotter_label(spotter: &SpotterChannel) -> String {
    match spotter {
        SpotterChannel::Oracle => "oracle".to_string(),
        SpotterChannel::Noisy { epsilon } => format!("noisy({epsilon})"),
        SpotterChannel::External {
            fallback_to_oracle, ..
        } => {
            if *fallback_to_oracle {
                "external+oracle-fallback".to_string()
            } else {
                "external".to_string()
            }
        }
    }
}

/// One complete game setup.
pub struct GameSetup<'a> {
    pub config: &'a BoardConfig,
    pub truth: Board,
    pub board_id: String,
    pub policy: &'a CaptainPolicy,
    pub seeds: GameSeeds,
    pub options: RunOptions,
}

/// Plays a game to completion. Deterministic given the setup (and a
/// deterministic agent/spotter).
pub fn run_game(
    setup: GameSetup<'_>,
    spotter: &mut SpotterChannel,
    mut agent: Option<&mut (dyn ExternalCaptain + '_)>,
) -> Result<Trajectory, EngineError> {
    let GameSetup {
        config,
        truth,
        board_id,
        policy,
        seeds,
        options,
    } = setup;
    policy.validate()?;
    config.validate()?;
    truth.check(config)?;
    let mut captain_rng = ChaCha8Rng::seed_from_u64(seeds.captain);
    let mut belief_rng = ChaCha8Rng::seed_from_u64(seeds.captain);
    belief_rng.set_stream(1);
    let mut spotter_rng = ChaCha8Rng::seed_from_u64(seeds.spotter);

    let header = TrajectoryHeader {
        v: TRAJECTORY_VERSION,
        env: "battleship".into(),
        board_id,
        config: config.clone(),
        seeds,
        policy: policy.clone(),
        spotter: spotter_label(spotter),
        options,
        shadow_scored: !policy.uses_belief() && policy.can_ask() && options.shadow_belief,
        truth: truth.to_text(),
    };
    let mut state = GameState::new(config.clone(), truth);
    let needs_belief =
        policy.uses_belief() || (policy.can_ask() && options.shadow_belief) || options.snapshots;
    let mut belief = if needs_belief {
        Some(ParticleBelief::init(
            config,
            &state.partial,
            options.particles,
            options.belief_epsilon,
            &mut belief_rng,
        )?)
    } else {
        None
    };

    let mut error = None;
    while !state.is_done() {
        if options.snapshots {
            if let Some(b) = &belief {
                let grid = b.hit_probability_grid(&state.partial).probs().to_vec();
                state.events.push(Event::Snapshot {
                    turn: state.turn,
                    grid,
                });
            }
        }
        let Decision {
            action,
            diagnostics,
        } = {
            let ctx = TurnContext {
                config,
                belief: belief.as_ref(),
                partial: &state.partial,
                budgets: state.budgets(),
                history: &state.events,
            };
            decide(policy, &ctx, agent.as_deref_mut(), &mut captain_rng)?
        };
        for reason in &diagnostics.fallbacks {
            state.events.push(Event::Fallback {
                turn: state.turn,
                reason: reason.clone(),
            });
        }
        let before = state.partial.clone();
        let result = state.step(&action, Some(&diagnostics), spotter, &mut spotter_rng)?;
        let sync = match (&mut belief, &action, result) {
            (Some(b), Action::Ask(q), StepResult::Answered { value }) => {
                b.update_answer(q, value, &before, &mut belief_rng)
            }
            (Some(b), Action::Fire(_), _) if !state.is_done() => {
                b.update_reveal(&state.partial, &mut belief_rng)
            }
            _ => Ok(()),
        };
        if let Err(e) = sync {
            let reason = format!("belief: {e}");
            state.events.push(Event::Fallback {
                turn: state.turn,
                reason: reason.clone(),
            });
            state.outcome = Outcome::Error;
            error = Some(reason);
        }
    }

    let hits = state
        .events
        .iter()
        .filter(|e| matches!(e, Event::Shot { hit: true, .. }))
        .count() as u32;
    let result = GameResult {
        outcome: state.outcome,
        moves_used: config.move_budget - state.moves_left,
        questions_used: config.question_budget - state.questions_left,
        hits,
        ship_cells: state.truth.occupied().len() as u32,
        error,
    };
    Ok(Trajectory {
        header,
        events: state.events,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Placement;

    fn setup<'a>(config: &'a BoardConfig, policy: &'a CaptainPolicy, seed: u64) -> GameSetup<'a> {
        let seeds = GameSeeds::from_seed(seed);
        GameSetup {
            config,
            truth: sample_truth(config, seeds.board).unwrap(),
            board_id: format!("b{seed}"),
            policy,
            seeds,
            options: RunOptions {
                particles: 300,
                ..RunOptions::default()
            },
        }
    }

    #[test]
    fn fire_last_cell_wins_and_ask_keeps_moves() {
        let config = BoardConfig::fixed(1, 4, &[(Color::Red, 2)]);
        let truth = Board::from_placements(
            1,
            4,
            [(
                Color::Red,
                Placement {
                    origin: Coord::new(0, 1),
                    horizontal: true,
                    length: 2,
                },
            )],
        )
        .unwrap();
        let mut state = GameState::new(config, truth);
        let mut spotter = SpotterChannel::Oracle;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = Question::parse("(any-ship (col 1))", 1, 4).unwrap();
        state
            .step(&Action::Ask(q), None, &mut spotter, &mut rng)
            .unwrap();
        assert_eq!((state.questions_left, state.moves_left), (14, 40));
        state
            .step(
                &Action::Fire(Coord::new(0, 1)),
                None,
                &mut spotter,
                &mut rng,
            )
            .unwrap();
        assert!(matches!(
            state.step(
                &Action::Fire(Coord::new(0, 1)),
                None,
                &mut spotter,
                &mut rng
            ),
            Err(EngineError::AlreadyRevealed(_))
        ));
        let r = state
            .step(
                &Action::Fire(Coord::new(0, 2)),
                None,
                &mut spotter,
                &mut rng,
            )
            .unwrap();
        assert_eq!(
            r,
            StepResult::Shot {
                hit: true,
                sunk: Some(Color::Red)
            }
        );
        assert_eq!(state.outcome, Outcome::Win);
        assert!(state
            .step(
                &Action::Fire(Coord::new(0, 0)),
                None,
                &mut spotter,
                &mut rng
            )
            .is_err());
    }

    #[test]
    fn budget_exhaustion_loses() {
        let mut config = BoardConfig::default();
        config.move_budget = 3;
        config.question_budget = 0;
        let policy = CaptainPolicy::preset("random").unwrap();
        let t = run_game(
            setup(&config, &policy, 1),
            &mut SpotterChannel::Oracle,
            None,
        )
        .unwrap();
        assert_eq!(t.result.outcome, Outcome::Loss);
        assert_eq!(t.result.moves_used, 3);
        let mut state = GameState::new(config.clone(), sample_truth(&config, 1).unwrap());
        let q = Question::parse("(any-ship (row A))", 8, 8).unwrap();
        let err = state.step(
            &Action::Ask(q),
            None,
            &mut SpotterChannel::Oracle,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert_eq!(err, Err(EngineError::NoQuestionsLeft));
    }

    #[test]
    fn random_uses_all_moves_without_repeats() {
        let config = BoardConfig::default();
        let policy = CaptainPolicy::preset("random").unwrap();
        for seed in 0..20 {
            let t = run_game(
                setup(&config, &policy, seed),
                &mut SpotterChannel::Oracle,
                None,
            )
            .unwrap();
            let shots: Vec<Coord> = t.shots().map(|(c, _)| c).collect();
            let mut dedup = shots.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), shots.len());
            if t.result.outcome == Outcome::Loss {
                assert_eq!(shots.len(), 40);
            }
        }
    }

    #[test]
    fn same_seeds_same_trajectory() {
        let config = BoardConfig::default();
        let policy = CaptainPolicy::preset("bayes-qmd").unwrap();
        let a = run_game(
            setup(&config, &policy, 9),
            &mut SpotterChannel::noisy(0.1).unwrap(),
            None,
        )
        .unwrap();
        let b = run_game(
            setup(&config, &policy, 9),
            &mut SpotterChannel::noisy(0.1).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a.result.questions_used > 0);
        assert_eq!(a.result.questions_used as usize, a.question_eigs().count());
    }

    #[test]
    fn seeds_spread() {
        let s = GameSeeds::from_seed(0);
        assert!(s.board != s.captain && s.captain != s.spotter);
        assert_eq!(s, GameSeeds::from_seed(0));
    }
}
