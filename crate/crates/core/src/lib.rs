//! Bayesian experimental design for information-seeking agents.
//!
//! The crate models collaborative Battleship (a captain who can only see a
//! fog-of-war board, asking a spotter yes/no questions under a noise budget)
//! and a Guess Who entity game, and implements Bayes-rational captains on top
//! of a particle belief: expected-information-gain question selection, MAP
//! targeting and a discounted one-step lookahead decision rule.
//!
//! Everything here is `no_std` + `alloc`; file formats, the CLI and the
//! language-model adapter live in the `infoseek` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod agent;
pub mod belief;
pub mod board;
pub mod cells;
pub mod engine;
pub mod guesswho;
pub mod metrics;
pub mod question;
pub mod sexpr;
pub mod spotter;
pub mod strategy;

pub use belief::{BeliefError, HitGrid, LoggedAnswer, ParticleBelief};
pub use board::{Board, BoardConfig, BoardError, Cell, Obs, PartialBoard, Placement, ShipSpec};
pub use cells::{CellSet, Color, Coord};
pub use engine::{run_game, GameSeeds, GameSetup, GameState, Outcome, RunOptions, Trajectory};
pub use question::{AnswerVector, Atom, Cmp, Question, QuestionError, Region};
pub use spotter::SpotterChannel;
pub use strategy::{Action, CaptainPolicy, Decision};
