use alloc::vec::Vec;

use crate::belief::{eig_from_yes_probability, BeliefError};

use super::Roster;

/// A subset of roster indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntitySet {
    words: Vec<u64>,
    len: usize,
}

impl EntitySet {
    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut words = alloc::vec![0u64; len.div_ceil(64)];
        for i in 0..len {
            if f(i) {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        EntitySet { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn zip(&self, other: &EntitySet, f: impl Fn(u64, u64) -> u64) -> EntitySet {
        EntitySet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            len: self.len,
        }
    }

    pub fn and(&self, other: &EntitySet) -> EntitySet {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &EntitySet) -> EntitySet {
        self.zip(other, |a, b| a | b)
    }

    /// Restriction to `mask`, used to compare questions on surviving entities only.
    pub fn masked(&self, mask: &EntitySet) -> EntitySet {
        self.and(mask)
    }
}

/// Exact posterior over roster entities.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityBelief {
    probs: Vec<f64>,
    epsilon: f64,
}

impl EntityBelief {
    pub fn uniform(n: usize, epsilon: f64) -> Result<Self, BeliefError> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(BeliefError::InvalidEpsilon(epsilon));
        }
        if n == 0 {
            return Err(BeliefError::NoParticles);
        }
        Ok(EntityBelief {
            probs: alloc::vec![1.0 / n as f64; n],
            epsilon,
        })
    }

    pub fn for_roster(roster: &Roster, epsilon: f64) -> Result<Self, BeliefError> {
        Self::uniform(roster.len(), epsilon)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Entities with nonzero probability.
    pub fn support(&self) -> EntitySet {
        EntitySet::from_fn(self.probs.len(), |i| self.probs[i] > 0.0)
    }

    pub fn yes_probability(&self, answers: &EntitySet) -> f64 {
        let p: f64 = (0..self.probs.len())
            .filter(|&i| answers.get(i))
            .map(|i| self.probs[i])
            .sum();
        p.clamp(0.0, 1.0)
    }

    pub fn eig(&self, answers: &EntitySet) -> f64 {
        eig_from_yes_probability(self.yes_probability(answers), self.epsilon)
    }

    /// Bayes update through the binary symmetric channel. On a zero-mass
    /// result the belief is left unchanged and `Depleted` is returned.
    pub fn update(&mut self, answers: &EntitySet, observed: bool) -> Result<(), BeliefError> {
        let eps = self.epsilon;
        let next: Vec<f64> = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                p * if answers.get(i) == observed {
                    1.0 - eps
                } else {
                    eps
                }
            })
            .collect();
        let total: f64 = next.iter().sum();
        if total <= 0.0 {
            return Err(BeliefError::Depleted);
        }
        self.probs = next.into_iter().map(|p| p / total).collect();
        Ok(())
    }

    /// Most probable entity; ties go to the alphabetically first name.
    pub fn map_guess(&self, roster: &Roster) -> usize {
        let mut best = 0;
        for i in 1..self.probs.len() {
            let (p, q) = (self.probs[i], self.probs[best]);
            if p > q || (p == q && roster.entities()[i].name < roster.entities()[best].name) {
                best = i;
            }
        }
        best
    }
}
