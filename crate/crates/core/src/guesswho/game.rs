use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AttrQuestion, AttrTemplatePool, EntityBelief, EntitySet, Roster};
use crate::agent::AgentError;
use crate::belief::BeliefError;
use crate::engine::{GameSeeds, Outcome, TRAJECTORY_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GwQuestionRule {
    BayesEig,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GwGuessRule {
    Map,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessPolicy {
    pub name: String,
    pub question: GwQuestionRule,
    pub guess: GwGuessRule,
}

pub const GW_PRESETS: [&str; 4] = ["lm", "bayes-q", "bayes-m", "bayes-qm"];

impl GuessPolicy {
    pub fn preset(name: &str) -> Option<Self> {
        use GwGuessRule as G;
        use GwQuestionRule as Q;
        let (question, guess) = match name {
            "lm" => (Q::External, G::External),
            "bayes-q" => (Q::BayesEig, G::External),
            "bayes-m" => (Q::External, G::Map),
            "bayes-qm" => (Q::BayesEig, G::Map),
            _ => return None,
        };
        Some(GuessPolicy {
            name: name.into(),
            question,
            guess,
        })
    }
}

/// An outside questioner/guesser (a language model or a person).
pub trait ExternalGuesser {
    fn propose_question(
        &mut self,
        roster: &Roster,
        history: &[GuessEvent],
        questions_left: u32,
    ) -> Result<AttrQuestion, AgentError>;
    fn guess(&mut self, roster: &Roster, history: &[GuessEvent]) -> Result<String, AgentError>;
}

/// Model-free stand-in: random single-attribute questions and a random guess
/// among entities agreeing with every answer so far.
#[derive(Debug, Clone)]
pub struct ScriptedGuesser {
    rng: ChaCha8Rng,
}

impl ScriptedGuesser {
    pub fn new(seed: u64) -> Self {
        ScriptedGuesser {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl ExternalGuesser for ScriptedGuesser {
    fn propose_question(
        &mut self,
        roster: &Roster,
        _: &[GuessEvent],
        _: u32,
    ) -> Result<AttrQuestion, AgentError> {
        let pool = AttrTemplatePool::new(roster);
        let atoms = pool.atoms();
        if atoms.is_empty() {
            return Err(AgentError::new("roster has no attributes"));
        }
        Ok(atoms[self.rng.gen_range(0..atoms.len())].clone())
    }

    fn guess(&mut self, roster: &Roster, history: &[GuessEvent]) -> Result<String, AgentError> {
        let mut asked: Option<&AttrQuestion> = None;
        let mut constraints: Vec<(&AttrQuestion, bool)> = Vec::new();
        for e in history {
            match e {
                GuessEvent::Question { question, .. } => asked = Some(question),
                GuessEvent::Answer { value, .. } => {
                    if let Some(q) = asked.take() {
                        constraints.push((q, *value));
                    }
                }
                _ => {}
            }
        }
        let fits: Vec<&str> = roster
            .entities()
            .iter()
            .filter(|e| constraints.iter().all(|(q, v)| q.eval_unchecked(e) == *v))
            .map(|e| e.name.as_str())
            .collect();
        let pick = if fits.is_empty() {
            roster.entities()[self.rng.gen_range(0..roster.len())]
                .name
                .as_str()
        } else {
            fits[self.rng.gen_range(0..fits.len())]
        };
        Ok(pick.to_string())
    }
}

/// Answers attribute questions about the hidden entity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EntitySpotter {
    Oracle,
    Noisy { epsilon: f64 },
}

impl EntitySpotter {
    pub fn label(&self) -> String {
        match self {
            EntitySpotter::Oracle => "oracle".into(),
            EntitySpotter::Noisy { epsilon } => format!("noisy({epsilon})"),
        }
    }

    fn answer<R: Rng + ?Sized>(&self, truth: bool, rng: &mut R) -> bool {
        match *self {
            EntitySpotter::Oracle => truth,
            EntitySpotter::Noisy { epsilon } => {
                truth ^ (epsilon > 0.0 && rng.gen::<f64>() < epsilon)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GuessEvent {
    Question {
        turn: u32,
        question: AttrQuestion,
        eig: f64,
        p_yes: f64,
        candidates: u32,
    },
    Answer {
        turn: u32,
        value: bool,
        truth: bool,
    },
    Guess {
        turn: u32,
        name: String,
        correct: bool,
    },
    Fallback {
        turn: u32,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessTrajectoryHeader {
    pub v: u32,
    pub env: String,
    pub roster_size: usize,
    pub target: String,
    pub seeds: GameSeeds,
    pub policy: GuessPolicy,
    pub spotter: String,
    pub budget: u32,
    pub belief_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessResult {
    pub outcome: Outcome,
    pub questions_used: u32,
    pub guess: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessTrajectory {
    pub header: GuessTrajectoryHeader,
    pub events: Vec<GuessEvent>,
    pub result: GuessResult,
}

impl GuessTrajectory {
    pub fn question_eigs(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().filter_map(|e| match e {
            GuessEvent::Question { eig, .. } => Some(*eig),
            _ => None,
        })
    }
}

/// Precomputed answer sets of every pool atom.
struct ScoredPool {
    atoms: Vec<(AttrQuestion, EntitySet)>,
}

impl ScoredPool {
    fn new(roster: &Roster) -> Self {
        let pool = AttrTemplatePool::new(roster);
        let atoms = pool
            .atoms()
            .iter()
            .map(|q| {
                (
                    q.clone(),
                    EntitySet::from_fn(roster.len(), |i| q.eval_unchecked(&roster.entities()[i])),
                )
            })
            .collect();
        ScoredPool { atoms }
    }
}

/// Highest-EIG question over all atoms and their pairwise and/or
/// combinations, after dropping candidates that are constant on the surviving
/// entities and keeping one question (smallest text) per distinct answer
/// pattern. Returns the question, its EIG, its yes-probability and the number
/// of distinct candidates; `None` if every candidate is constant.
pub fn select_question(
    belief: &EntityBelief,
    roster: &Roster,
) -> Option<(AttrQuestion, f64, f64, usize)> {
    select_from(belief, &ScoredPool::new(roster))
}

fn select_from(
    belief: &EntityBelief,
    pool: &ScoredPool,
) -> Option<(AttrQuestion, f64, f64, usize)> {
    let support = belief.support();
    let alive = support.count();
    let mut distinct: BTreeMap<EntitySet, (String, AttrQuestion, EntitySet)> = BTreeMap::new();
    let mut offer = |q: AttrQuestion, set: EntitySet| {
        let key = set.masked(&support);
        let n = key.count();
        if n == 0 || n == alive {
            return;
        }
        let text = q.to_string();
        match distinct.get(&key) {
            Some((t, _, _)) if *t <= text => {}
            _ => {
                distinct.insert(key, (text, q, set));
            }
        }
    };
    let atoms = &pool.atoms;
    for (q, s) in atoms {
        offer(q.clone(), s.clone());
    }
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let (a, b) = (&atoms[i], &atoms[j]);
            let pair = alloc::vec![a.0.clone(), b.0.clone()];
            offer(AttrQuestion::And(pair.clone()).canonical(), a.1.and(&b.1));
            offer(AttrQuestion::Or(pair).canonical(), a.1.or(&b.1));
        }
    }
    let count = distinct.len();
    let mut best: Option<(f64, &String, &AttrQuestion, &EntitySet)> = None;
    for (text, q, set) in distinct.values() {
        let eig = belief.eig(set);
        if best.is_none_or(|(e, t, _, _)| eig > e || (eig == e && text < t)) {
            best = Some((eig, text, q, set));
        }
    }
    best.map(|(eig, _, q, set)| (q.clone(), eig, belief.yes_probability(set), count))
}

pub struct GuessWhoSetup<'a> {
    pub roster: &'a Roster,
    pub target: usize,
    pub policy: &'a GuessPolicy,
    pub budget: u32,
    pub belief_epsilon: f64,
    pub seeds: GameSeeds,
}

/// Uniformly random target index for a board seed.
pub fn sample_target(roster: &Roster, seed: u64) -> usize {
    ChaCha8Rng::seed_from_u64(seed).gen_range(0..roster.len())
}

/// Asks until the budget is spent, then makes exactly one guess.
pub fn run_guesswho(
    setup: GuessWhoSetup<'_>,
    spotter: EntitySpotter,
    mut agent: Option<&mut (dyn ExternalGuesser + '_)>,
) -> Result<GuessTrajectory, BeliefError> {
    let GuessWhoSetup {
        roster,
        target,
        policy,
        budget,
        belief_epsilon,
        seeds,
    } = setup;
    let mut belief = EntityBelief::for_roster(roster, belief_epsilon)?;
    let mut spotter_rng = ChaCha8Rng::seed_from_u64(seeds.spotter);
    let pool = ScoredPool::new(roster);
    let header = GuessTrajectoryHeader {
        v: TRAJECTORY_VERSION,
        env: "guesswho".into(),
        roster_size: roster.len(),
        target: roster.entities()[target].name.clone(),
        seeds,
        policy: policy.clone(),
        spotter: spotter.label(),
        budget,
        belief_epsilon,
    };
    let mut events: Vec<GuessEvent> = Vec::new();
    let mut turn = 0u32;
    let mut error = None;

    while turn < budget {
        let mut external = None;
        if policy.question == GwQuestionRule::External {
            match agent
                .as_deref_mut()
                .map(|a| a.propose_question(roster, &events, budget - turn))
            {
                Some(Ok(q)) => match q.check(roster.schema()) {
                    Ok(()) => external = Some(q),
                    Err(e) => events.push(GuessEvent::Fallback {
                        turn,
                        reason: format!("question: {e}"),
                    }),
                },
                Some(Err(e)) => events.push(GuessEvent::Fallback {
                    turn,
                    reason: format!("question: {e}"),
                }),
                None => events.push(GuessEvent::Fallback {
                    turn,
                    reason: "question: no external guesser".into(),
                }),
            }
        }
        let (question, eig, p_yes, candidates) = match external {
            Some(q) => {
                let set = q.answers(roster).expect("checked against schema");
                (q, belief.eig(&set), belief.yes_probability(&set), 1)
            }
            None => match select_from(&belief, &pool) {
                Some(found) => found,
                // nothing left to learn: the remaining budget is useless
                None => break,
            },
        };
        let truth = question.eval_unchecked(&roster.entities()[target]);
        let value = spotter.answer(truth, &mut spotter_rng);
        events.push(GuessEvent::Question {
            turn,
            question: question.clone(),
            eig,
            p_yes,
            candidates: candidates as u32,
        });
        events.push(GuessEvent::Answer { turn, value, truth });
        let set = question.answers(roster).expect("checked against schema");
        turn += 1;
        if let Err(e) = belief.update(&set, value) {
            let reason = format!("belief: {e}");
            events.push(GuessEvent::Fallback {
                turn,
                reason: reason.clone(),
            });
            error = Some(reason);
            break;
        }
    }

    if let Some(reason) = error {
        return Ok(GuessTrajectory {
            header,
            events,
            result: GuessResult {
                outcome: Outcome::Error,
                questions_used: turn,
                guess: None,
                error: Some(reason),
            },
        });
    }

    let mut guess = None;
    if policy.guess == GwGuessRule::External {
        match agent.as_deref_mut().map(|a| a.guess(roster, &events)) {
            Some(Ok(name)) => match roster.index_of(&name) {
                Some(i) => guess = Some(i),
                None => events.push(GuessEvent::Fallback {
                    turn,
                    reason: format!("guess: unknown entity '{name}'"),
                }),
            },
            Some(Err(e)) => events.push(GuessEvent::Fallback {
                turn,
                reason: format!("guess: {e}"),
            }),
            None => events.push(GuessEvent::Fallback {
                turn,
                reason: "guess: no external guesser".into(),
            }),
        }
    }
    let guess = guess.unwrap_or_else(|| belief.map_guess(roster));
    let correct = guess == target;
    let name = roster.entities()[guess].name.clone();
    events.push(GuessEvent::Guess {
        turn,
        name: name.clone(),
        correct,
    });
    Ok(GuessTrajectory {
        header,
        events,
        result: GuessResult {
            outcome: if correct { Outcome::Win } else { Outcome::Loss },
            questions_used: turn,
            guess: Some(name),
            error: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::entity;
    use super::*;
    use alloc::vec;

    fn setup<'a>(
        roster: &'a Roster,
        policy: &'a GuessPolicy,
        budget: u32,
        seed: u64,
    ) -> GuessWhoSetup<'a> {
        let seeds = GameSeeds::from_seed(seed);
        GuessWhoSetup {
            roster,
            target: sample_target(roster, seeds.board),
            policy,
            budget,
            belief_epsilon: 0.0,
            seeds,
        }
    }

    #[test]
    fn one_question_resolves_two_entities() {
        let roster = Roster::new(vec![
            entity("Alex", &[("gender", "male")], &[]),
            entity("Elena", &[("gender", "female")], &[]),
        ])
        .unwrap();
        let policy = GuessPolicy::preset("bayes-qm").unwrap();
        for seed in 0..20 {
            let t = run_guesswho(
                setup(&roster, &policy, 1, seed),
                EntitySpotter::Oracle,
                None,
            )
            .unwrap();
            assert_eq!(t.result.outcome, Outcome::Win);
            assert_eq!(t.question_eigs().next(), Some(1.0));
        }
    }

    #[test]
    fn selected_eig_beats_pool_mean() {
        let roster = Roster::new(
            (0..16)
                .map(|i| {
                    let bits = |b: usize| if i >> b & 1 == 1 { "yes" } else { "no" };
                    entity(
                        &format!("e{i:02}"),
                        &[
                            ("a", bits(0)),
                            ("b", bits(1)),
                            ("c", bits(2)),
                            ("d", bits(3)),
                        ],
                        &[],
                    )
                })
                .collect(),
        )
        .unwrap();
        let b = EntityBelief::for_roster(&roster, 0.0).unwrap();
        let (_, eig, p, n) = select_question(&b, &roster).unwrap();
        assert_eq!((eig, p), (1.0, 0.5));
        // 8 atoms collapse to 4 distinct splits (a=yes vs a=no are complements, not duplicates)
        assert!(n > 4);
    }

    #[test]
    fn zero_budget_guesses_alphabetical_first() {
        let roster = Roster::new(vec![
            entity("Zed", &[("x", "1")], &[]),
            entity("Amy", &[("x", "2")], &[]),
        ])
        .unwrap();
        let policy = GuessPolicy::preset("bayes-qm").unwrap();
        let t = run_guesswho(setup(&roster, &policy, 0, 1), EntitySpotter::Oracle, None).unwrap();
        assert_eq!(t.result.guess.as_deref(), Some("Amy"));
        assert_eq!(t.result.questions_used, 0);
    }

    #[test]
    fn external_rules_fall_back_without_agent() {
        let roster = Roster::new(vec![
            entity("A", &[("x", "1")], &[]),
            entity("B", &[("x", "2")], &[]),
        ])
        .unwrap();
        let policy = GuessPolicy::preset("lm").unwrap();
        let t = run_guesswho(setup(&roster, &policy, 1, 2), EntitySpotter::Oracle, None).unwrap();
        assert_eq!(t.result.outcome, Outcome::Win);
        assert_eq!(
            t.events
                .iter()
                .filter(|e| matches!(e, GuessEvent::Fallback { .. }))
                .count(),
            2
        );
        let mut scripted = ScriptedGuesser::new(0);
        let t = run_guesswho(
            setup(&roster, &policy, 1, 2),
            EntitySpotter::Oracle,
            Some(&mut scripted),
        )
        .unwrap();
        assert_eq!(t.result.outcome, Outcome::Win);
    }
}
