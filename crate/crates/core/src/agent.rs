//! Hooks for captains and spotters driven from outside the crate (language
//! models, humans at a terminal), plus a scripted stand-in captain used when
//! no model is attached.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::board::{Board, BoardConfig, PartialBoard};
use crate::cells::Coord;
use crate::engine::Event;
use crate::question::{Question, TemplatePool};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct AgentError(pub String);

impl AgentError {
    pub fn new(msg: impl Into<String>) -> Self {
        AgentError(msg.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionKind {
    Question,
    Move,
}

/// Everything a captain is shown on its turn.
#[derive(Debug, Clone, Copy)]
pub struct CaptainView<'a> {
    pub config: &'a BoardConfig,
    pub partial: &'a PartialBoard,
    pub questions_left: u32,
    pub moves_left: u32,
    pub history: &'a [Event],
}

pub trait ExternalCaptain {
    fn decide(&mut self, view: &CaptainView<'_>) -> Result<DecisionKind, AgentError>;
    fn propose_move(&mut self, view: &CaptainView<'_>) -> Result<Coord, AgentError>;
    fn propose_question(&mut self, view: &CaptainView<'_>) -> Result<Question, AgentError>;
    /// A batch of up to `k` distinct candidate questions.
    fn propose_questions(
        &mut self,
        view: &CaptainView<'_>,
        k: usize,
    ) -> Result<Vec<Question>, AgentError>;
}

pub trait ExternalSpotter {
    fn answer(
        &mut self,
        question: &Question,
        truth: &Board,
        partial: &PartialBoard,
    ) -> Result<bool, AgentError>;
}

impl<T: ExternalCaptain + ?Sized> ExternalCaptain for Box<T> {
    fn decide(&mut self, view: &CaptainView<'_>) -> Result<DecisionKind, AgentError> {
        (**self).decide(view)
    }
    fn propose_move(&mut self, view: &CaptainView<'_>) -> Result<Coord, AgentError> {
        (**self).propose_move(view)
    }
    fn propose_question(&mut self, view: &CaptainView<'_>) -> Result<Question, AgentError> {
        (**self).propose_question(view)
    }
    fn propose_questions(
        &mut self,
        view: &CaptainView<'_>,
        k: usize,
    ) -> Result<Vec<Question>, AgentError> {
        (**self).propose_questions(view, k)
    }
}

/// Model-free stand-in for the language-model captain: asks whenever it still
/// has questions (front-loading, as weak models do), proposes uniformly random
/// template questions and fires at uniformly random hidden tiles.
#[derive(Debug, Clone)]
pub struct ScriptedCaptain {
    rng: ChaCha8Rng,
}

impl ScriptedCaptain {
    pub fn new(seed: u64) -> Self {
        ScriptedCaptain {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn random_template(&mut self, pool: &TemplatePool) -> Question {
        let base = pool.base().len();
        let combos = pool.combination_count();
        if combos == 0 || self.rng.gen_bool(0.5) {
            pool.base()[self.rng.gen_range(0..base)].clone()
        } else {
            pool.combination(self.rng.gen_range(0..combos))
        }
    }
}

impl ExternalCaptain for ScriptedCaptain {
    fn decide(&mut self, view: &CaptainView<'_>) -> Result<DecisionKind, AgentError> {
        Ok(if view.questions_left > 0 {
            DecisionKind::Question
        } else {
            DecisionKind::Move
        })
    }

    fn propose_move(&mut self, view: &CaptainView<'_>) -> Result<Coord, AgentError> {
        let hidden: Vec<usize> = view.partial.hidden_cells().iter().collect();
        if hidden.is_empty() {
            return Err(AgentError::new("no hidden tiles"));
        }
        Ok(Coord::from_index(
            hidden[self.rng.gen_range(0..hidden.len())],
            view.partial.cols(),
        ))
    }

    fn propose_question(&mut self, view: &CaptainView<'_>) -> Result<Question, AgentError> {
        let pool = TemplatePool::new(view.partial, view.config);
        Ok(self.random_template(&pool))
    }

    fn propose_questions(
        &mut self,
        view: &CaptainView<'_>,
        k: usize,
    ) -> Result<Vec<Question>, AgentError> {
        let pool = TemplatePool::new(view.partial, view.config);
        let mut out: Vec<Question> = Vec::with_capacity(k);
        for _ in 0..k * 4 {
            if out.len() >= k {
                break;
            }
            let q = self.random_template(&pool);
            if !out.contains(&q) {
                out.push(q);
            }
        }
        Ok(out)
    }
}
