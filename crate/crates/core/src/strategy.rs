//! Captain strategies: move-only baselines, EIG question selection, MAP
//! targeting and the discounted one-step lookahead that decides between
//! asking and shooting.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{CaptainView, DecisionKind, ExternalCaptain};
use crate::belief::{argmax_hidden, eig_from_yes_probability, ParticleBelief};
use crate::board::{BoardConfig, PartialBoard};
use crate::cells::Coord;
use crate::engine::Event;
use crate::question::{answer_vector, enumerate_candidates, AnswerVector, Question};

pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_CANDIDATES: usize = 10;
/// Floating-point margin for the lookahead test; gains below it count as ties.
pub const LOOKAHEAD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecisionRule {
    AlwaysMove,
    External,
    Lookahead { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuestionRule {
    None,
    External,
    BayesEig { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveRule {
    UniformRandom,
    BayesMap,
    External,
}

/// Where EIG-ranked candidate questions come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionSource {
    Templates,
    External,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error("unknown policy preset '{0}'")]
    UnknownPreset(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(&'static str),
    #[error("empty candidate list")]
    NoCandidates,
    #[error("no hidden tiles left")]
    NoHiddenTiles,
    #[error("move budget exhausted")]
    NoMovesLeft,
    #[error("policy needs a belief but none was provided")]
    NeedsBelief,
}

/// A captain: decision, question and move rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptainPolicy {
    pub name: String,
    pub decision: DecisionRule,
    pub question: QuestionRule,
    pub moves: MoveRule,
    pub source: QuestionSource,
}

pub const PRESETS: [&str; 7] = [
    "random",
    "greedy",
    "lm",
    "bayes-q",
    "bayes-m",
    "bayes-qm",
    "bayes-qmd",
];

impl CaptainPolicy {
    /// Named rows of the strategy ladder.
    pub fn preset(name: &str) -> Result<Self, StrategyError> {
        let k = DEFAULT_CANDIDATES;
        let (decision, question, moves) = match name {
            "random" => (
                DecisionRule::AlwaysMove,
                QuestionRule::None,
                MoveRule::UniformRandom,
            ),
            "greedy" => (
                DecisionRule::AlwaysMove,
                QuestionRule::None,
                MoveRule::BayesMap,
            ),
            "lm" => (
                DecisionRule::External,
                QuestionRule::External,
                MoveRule::External,
            ),
            "bayes-q" => (
                DecisionRule::External,
                QuestionRule::BayesEig { k },
                MoveRule::External,
            ),
            "bayes-m" => (
                DecisionRule::External,
                QuestionRule::External,
                MoveRule::BayesMap,
            ),
            "bayes-qm" => (
                DecisionRule::External,
                QuestionRule::BayesEig { k },
                MoveRule::BayesMap,
            ),
            "bayes-qmd" => (
                DecisionRule::Lookahead {
                    gamma: DEFAULT_GAMMA,
                },
                QuestionRule::BayesEig { k },
                MoveRule::BayesMap,
            ),
            other => return Err(StrategyError::UnknownPreset(other.into())),
        };
        Ok(CaptainPolicy {
            name: name.into(),
            decision,
            question,
            moves,
            source: QuestionSource::Templates,
        })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        if let DecisionRule::Lookahead { gamma: g } = &mut self.decision {
            *g = gamma;
        }
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        if let QuestionRule::BayesEig { k: kk } = &mut self.question {
            *kk = k;
        }
        self
    }

    pub fn with_source(mut self, source: QuestionSource) -> Self {
        self.source = source;
        self
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        if self.decision == DecisionRule::AlwaysMove && self.question != QuestionRule::None {
            return Err(StrategyError::InvalidPolicy(
                "move-only policies cannot ask",
            ));
        }
        if let DecisionRule::Lookahead { gamma } = self.decision {
            if !(0.0..=1.0).contains(&gamma) {
                return Err(StrategyError::InvalidPolicy("gamma must lie in [0, 1]"));
            }
            if self.question == QuestionRule::None {
                return Err(StrategyError::InvalidPolicy(
                    "lookahead needs a question rule",
                ));
            }
        }
        if self.question == (QuestionRule::BayesEig { k: 0 }) {
            return Err(StrategyError::InvalidPolicy("k must be at least 1"));
        }
        Ok(())
    }

    /// Whether any rule talks to an external captain.
    pub fn uses_external(&self) -> bool {
        self.decision == DecisionRule::External
            || self.question == QuestionRule::External
            || self.moves == MoveRule::External
            || (matches!(self.question, QuestionRule::BayesEig { .. })
                && self.source != QuestionSource::Templates)
    }

    /// Whether the policy can ever ask a question.
    pub fn can_ask(&self) -> bool {
        self.question != QuestionRule::None
    }

    /// Whether the captain's own choices read a particle belief (otherwise a
    /// belief kept for scoring is a passive shadow).
    pub fn uses_belief(&self) -> bool {
        matches!(self.decision, DecisionRule::Lookahead { .. })
            || matches!(self.question, QuestionRule::BayesEig { .. })
            || self.moves == MoveRule::BayesMap
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Ask(Question),
    Fire(Coord),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub eig: Option<f64>,
    pub p_yes: Option<f64>,
    /// Current best hit probability.
    pub p_hit: Option<f64>,
    pub expected_post_hit: Option<f64>,
    pub candidates: usize,
    pub fallbacks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub questions_left: u32,
    pub moves_left: u32,
}

/// The chosen question, its EIG and its predicted yes-probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub question: Question,
    pub eig: f64,
    pub p_yes: f64,
    pub bits: AnswerVector,
}

/// Argmax-EIG over candidates with precomputed answer vectors; ties go to the
/// smallest canonical text.
pub fn select_question_scored(
    belief: &ParticleBelief,
    candidates: &[Question],
    vectors: &[AnswerVector],
) -> Result<Selection, StrategyError> {
    let mut best: Option<(f64, String, usize)> = None;
    for (i, bits) in vectors.iter().enumerate() {
        let eig = belief.eig_of(bits);
        let key = candidates[i].canonical_text();
        let better = match &best {
            None => true,
            Some((e, k, _)) => eig > *e || (eig == *e && key < *k),
        };
        if better {
            best = Some((eig, key, i));
        }
    }
    let (eig, _, i) = best.ok_or(StrategyError::NoCandidates)?;
    debug_assert!(vectors.iter().all(|v| belief.eig_of(v) <= eig));
    Ok(Selection {
        question: candidates[i].clone(),
        eig,
        p_yes: belief.yes_probability_of(&vectors[i]),
        bits: vectors[i].clone(),
    })
}

/// Argmax-EIG question among `candidates`.
pub fn select_question_bayes(
    belief: &ParticleBelief,
    candidates: &[Question],
    partial: &PartialBoard,
) -> Result<Selection, StrategyError> {
    let vectors: Vec<AnswerVector> = candidates
        .iter()
        .map(|q| answer_vector(q, belief.particles(), partial))
        .collect();
    select_question_scored(belief, candidates, &vectors)
}

/// MAP move: the hidden tile with the highest hit probability (row-major ties).
pub fn select_move_bayes(
    belief: &ParticleBelief,
    partial: &PartialBoard,
) -> Result<(Coord, f64), StrategyError> {
    belief
        .hit_probability_grid(partial)
        .argmax(partial)
        .ok_or(StrategyError::NoHiddenTiles)
}

/// Expected best hit probability after hearing the (noisy) answer to a
/// question with answer vector `bits`:
/// `Σ_ã Pr(Ã = ã) · max_u p_hit(u | ã)`. The belief itself is not modified.
pub fn expected_post_question_hit_of(
    belief: &ParticleBelief,
    bits: &AnswerVector,
    partial: &PartialBoard,
) -> f64 {
    let eps = belief.epsilon();
    let hidden = partial.hidden_cells();
    let cells = partial.cells();
    // unnormalized branch grids: Pr(ã)·p_hit(u | ã) = Σ_j w_j Pr(ã | s_j) 1{u ∈ s_j}
    let mut yes = alloc::vec![0.0; cells];
    let mut no = alloc::vec![0.0; cells];
    for (j, (b, &w)) in belief.particles().iter().zip(belief.weights()).enumerate() {
        if w == 0.0 {
            continue;
        }
        let (fy, fn_) = if bits.get(j) {
            (1.0 - eps, eps)
        } else {
            (eps, 1.0 - eps)
        };
        let (wy, wn) = (w * fy, w * fn_);
        for i in b.occupied().intersection(&hidden).iter() {
            yes[i] += wy;
            no[i] += wn;
        }
    }
    let best = |g: &[f64]| argmax_hidden(g, partial).map_or(0.0, |(_, p)| p);
    best(&yes) + best(&no)
}

pub fn expected_post_question_hit(
    belief: &ParticleBelief,
    q: &Question,
    partial: &PartialBoard,
) -> f64 {
    expected_post_question_hit_of(belief, &belief.answer_vector(q, partial), partial)
}

/// Inputs to [`decide`] besides the policy.
pub struct TurnContext<'a> {
    pub config: &'a BoardConfig,
    pub belief: Option<&'a ParticleBelief>,
    pub partial: &'a PartialBoard,
    pub budgets: Budgets,
    pub history: &'a [Event],
}

/// Chooses the captain's next action.
pub fn decide<R: Rng + ?Sized>(
    policy: &CaptainPolicy,
    ctx: &TurnContext<'_>,
    mut agent: Option<&mut (dyn ExternalCaptain + '_)>,
    rng: &mut R,
) -> Result<Decision, StrategyError> {
    if ctx.budgets.moves_left == 0 {
        return Err(StrategyError::NoMovesLeft);
    }
    if ctx.partial.hidden_count() == 0 {
        return Err(StrategyError::NoHiddenTiles);
    }
    let view = CaptainView {
        config: ctx.config,
        partial: ctx.partial,
        questions_left: ctx.budgets.questions_left,
        moves_left: ctx.budgets.moves_left,
        history: ctx.history,
    };
    let mut diag = Diagnostics::default();
    let can_ask = policy.can_ask() && ctx.budgets.questions_left > 0;

    let want_question = match policy.decision {
        DecisionRule::AlwaysMove => false,
        DecisionRule::External if !can_ask => false,
        DecisionRule::External => match agent.as_deref_mut() {
            Some(a) => match a.decide(&view) {
                Ok(kind) => kind == DecisionKind::Question,
                Err(e) => {
                    diag.fallbacks.push(format!("decision: {e}"));
                    false
                }
            },
            None => {
                diag.fallbacks.push("decision: no external captain".into());
                false
            }
        },
        DecisionRule::Lookahead { gamma } => {
            if !can_ask {
                false
            } else {
                let belief = ctx.belief.ok_or(StrategyError::NeedsBelief)?;
                let (_, p_hit) = select_move_bayes(belief, ctx.partial)?;
                diag.p_hit = Some(p_hit);
                match propose_question(policy, ctx, agent.as_deref_mut(), rng, &mut diag)? {
                    Some(sel) => {
                        let post = expected_post_question_hit_of(belief, &sel.bits, ctx.partial);
                        diag.expected_post_hit = Some(post);
                        if gamma * post > p_hit + LOOKAHEAD_TOLERANCE {
                            return Ok(ask(sel, diag));
                        }
                        false
                    }
                    None => false,
                }
            }
        }
    };

    if want_question {
        if let Some(sel) = propose_question(policy, ctx, agent.as_deref_mut(), rng, &mut diag)? {
            return Ok(ask(sel, diag));
        }
    }
    let target = choose_move(policy, ctx, agent, rng, &mut diag)?;
    if diag.p_hit.is_none() {
        diag.p_hit = ctx
            .belief
            .map(|b| b.hit_probability_grid(ctx.partial).get(target));
    }
    Ok(Decision {
        action: Action::Fire(target),
        diagnostics: diag,
    })
}

fn ask(sel: Selection, mut diag: Diagnostics) -> Decision {
    diag.eig = sel.eig.is_finite().then_some(sel.eig);
    diag.p_yes = sel.p_yes.is_finite().then_some(sel.p_yes);
    Decision {
        action: Action::Ask(sel.question),
        diagnostics: diag,
    }
}

/// A question per the question rule, scored against the belief when there is
/// one. `None` when no usable question is available (the caller fires instead).
fn propose_question<R: Rng + ?Sized>(
    policy: &CaptainPolicy,
    ctx: &TurnContext<'_>,
    agent: Option<&mut (dyn ExternalCaptain + '_)>,
    rng: &mut R,
    diag: &mut Diagnostics,
) -> Result<Option<Selection>, StrategyError> {
    let view = CaptainView {
        config: ctx.config,
        partial: ctx.partial,
        questions_left: ctx.budgets.questions_left,
        moves_left: ctx.budgets.moves_left,
        history: ctx.history,
    };
    let (rows, cols) = (ctx.partial.rows(), ctx.partial.cols());
    match policy.question {
        QuestionRule::None => Ok(None),
        QuestionRule::External => {
            let Some(agent) = agent else {
                diag.fallbacks.push("question: no external captain".into());
                return Ok(None);
            };
            match agent.propose_question(&view) {
                Ok(q) if q.in_bounds(rows, cols) => Ok(Some(score(ctx.belief, q, ctx.partial))),
                Ok(q) => {
                    diag.fallbacks.push(format!("question: out of bounds {q}"));
                    Ok(None)
                }
                Err(e) => {
                    diag.fallbacks.push(format!("question: {e}"));
                    Ok(None)
                }
            }
        }
        QuestionRule::BayesEig { k } => {
            let belief = ctx.belief.ok_or(StrategyError::NeedsBelief)?;
            let mut questions: Vec<Question> = Vec::new();
            let mut vectors: Vec<AnswerVector> = Vec::new();
            let mut all_null = true;
            if policy.source != QuestionSource::Templates {
                match agent {
                    Some(agent) => match agent.propose_questions(&view, k) {
                        Ok(qs) => {
                            for q in qs.into_iter().filter(|q| q.in_bounds(rows, cols)) {
                                let bits = belief.answer_vector(&q, ctx.partial);
                                if belief.eig_of(&bits) > 0.0 {
                                    all_null = false;
                                }
                                questions.push(q);
                                vectors.push(bits);
                            }
                        }
                        Err(e) => diag.fallbacks.push(format!("question batch: {e}")),
                    },
                    None => diag
                        .fallbacks
                        .push("question batch: no external captain".into()),
                }
            }
            if policy.source != QuestionSource::External {
                let set = enumerate_candidates(
                    ctx.partial,
                    ctx.config,
                    k,
                    belief.particles(),
                    Some(belief.weights()),
                    rng,
                );
                all_null &= set.eig_null;
                questions.extend(set.questions);
                vectors.extend(set.vectors);
            }
            diag.candidates = questions.len();
            if questions.is_empty() || all_null {
                return Ok(None);
            }
            select_question_scored(belief, &questions, &vectors).map(Some)
        }
    }
}

fn score(belief: Option<&ParticleBelief>, q: Question, partial: &PartialBoard) -> Selection {
    match belief {
        Some(b) => {
            let bits = b.answer_vector(&q, partial);
            let p = b.yes_probability_of(&bits);
            Selection {
                eig: eig_from_yes_probability(p, b.epsilon()),
                p_yes: p,
                bits,
                question: q,
            }
        }
        None => Selection {
            question: q,
            eig: f64::NAN,
            p_yes: f64::NAN,
            bits: AnswerVector::from_bits([]),
        },
    }
}

fn choose_move<R: Rng + ?Sized>(
    policy: &CaptainPolicy,
    ctx: &TurnContext<'_>,
    agent: Option<&mut (dyn ExternalCaptain + '_)>,
    rng: &mut R,
    diag: &mut Diagnostics,
) -> Result<Coord, StrategyError> {
    let uniform = |rng: &mut R| {
        let hidden: Vec<usize> = ctx.partial.hidden_cells().iter().collect();
        Coord::from_index(hidden[rng.gen_range(0..hidden.len())], ctx.partial.cols())
    };
    let fallback = |rng: &mut R, diag: &mut Diagnostics, why: String| {
        diag.fallbacks.push(why);
        match ctx.belief {
            Some(b) => select_move_bayes(b, ctx.partial).map(|(c, _)| c),
            None => Ok(uniform(rng)),
        }
    };
    match policy.moves {
        MoveRule::UniformRandom => Ok(uniform(rng)),
        MoveRule::BayesMap => {
            let belief = ctx.belief.ok_or(StrategyError::NeedsBelief)?;
            let (c, p) = select_move_bayes(belief, ctx.partial)?;
            diag.p_hit = Some(p);
            Ok(c)
        }
        MoveRule::External => {
            let view = CaptainView {
                config: ctx.config,
                partial: ctx.partial,
                questions_left: ctx.budgets.questions_left,
                moves_left: ctx.budgets.moves_left,
                history: ctx.history,
            };
            match agent.map(|a| a.propose_move(&view)) {
                Some(Ok(c))
                    if c.in_bounds(ctx.partial.rows(), ctx.partial.cols())
                        && ctx.partial.is_hidden(c) =>
                {
                    Ok(c)
                }
                Some(Ok(c)) => fallback(rng, diag, format!("move: {c} is not a hidden tile")),
                Some(Err(e)) => fallback(rng, diag, format!("move: {e}")),
                None => fallback(rng, diag, "move: no external captain".to_string()),
            }
        }
    }
}
