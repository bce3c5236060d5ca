//! The captain's posterior over hidden boards.
//!
//! [`ParticleBelief`] keeps a weighted population of boards consistent with
//! the revealed tiles. Answers reweight particles through the binary
//! symmetric channel likelihood; reveals are hard evidence and kill
//! disagreeing particles, after which the population is rejuvenated with
//! fresh consistent boards weighted by the whole answer history.

mod exact;
mod info;

use alloc::vec::Vec;

use rand::Rng;

use crate::board::{
    consistent_unchecked, BoardConfig, BoardError, ConsistentSampler, PartialBoard,
};
use crate::board::{Board, CONSISTENT_MAX_TRIES};
use crate::cells::Coord;
use crate::question::{answer_vector, AnswerVector, CompiledQuestion, Question};

pub use exact::{exact_posterior, ExactPosterior, EXACT_LIMIT};
pub use info::{
    binary_entropy, eig_from_yes_probability, max_eig, noisy_yes_probability, ProbabilityOutOfRange,
};

pub const DEFAULT_PARTICLES: usize = 2000;
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BeliefError {
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error("depleted: no particle is consistent with the evidence")]
    Depleted,
    #[error("epsilon {0} outside [0, 0.5]")]
    InvalidEpsilon(f64),
    #[error("particle count must be at least 1")]
    NoParticles,
}

/// A question and the (possibly noisy) answer heard, with the view it was asked against.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedAnswer {
    pub question: Question,
    pub answer: bool,
    pub view: PartialBoard,
}

impl LoggedAnswer {
    /// `Pr(answer | board)` under the channel.
    pub fn likelihood(&self, board: &Board, epsilon: f64) -> f64 {
        let truth = crate::question::evaluate(&self.question, board, &self.view);
        if truth == self.answer {
            1.0 - epsilon
        } else {
            epsilon
        }
    }
}

/// Per-tile hit probabilities; revealed tiles carry 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HitGrid {
    rows: u8,
    cols: u8,
    probs: Vec<f64>,
}

impl HitGrid {
    pub fn from_probs(rows: u8, cols: u8, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), rows as usize * cols as usize);
        HitGrid { rows, cols, probs }
    }

    pub fn rows(&self) -> u8 {
        self.rows
    }

    pub fn cols(&self) -> u8 {
        self.cols
    }

    pub fn get(&self, c: Coord) -> f64 {
        self.probs[c.index(self.cols)]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Highest-probability hidden tile; ties go to the first in row-major order.
    pub fn argmax(&self, partial: &PartialBoard) -> Option<(Coord, f64)> {
        argmax_hidden(&self.probs, partial).map(|(i, p)| (Coord::from_index(i, self.cols), p))
    }
}

pub(crate) fn argmax_hidden(probs: &[f64], partial: &PartialBoard) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for i in partial.hidden_cells().iter() {
        if best.is_none_or(|(_, p)| probs[i] > p) {
            best = Some((i, probs[i]));
        }
    }
    best
}

/// Weighted particle approximation of the posterior over boards.
#[derive(Debug, Clone)]
pub struct ParticleBelief {
    config: BoardConfig,
    particles: Vec<Board>,
    /// Normalized so that `Σ exp(log_weights) = 1`.
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    epsilon: f64,
    replay_log: Vec<LoggedAnswer>,
    target: usize,
}

fn check_epsilon(epsilon: f64) -> Result<(), BeliefError> {
    if (0.0..=0.5).contains(&epsilon) {
        Ok(())
    } else {
        Err(BeliefError::InvalidEpsilon(epsilon))
    }
}

#[inline]
fn ln_factor(agree: bool, epsilon: f64) -> f64 {
    libm::log(if agree { 1.0 - epsilon } else { epsilon })
}

/// Normalizes log-weights in place; `None` when every weight is zero.
fn normalize(log_weights: &mut [f64]) -> Option<Vec<f64>> {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return None;
    }
    let total: f64 = log_weights.iter().map(|l| libm::exp(l - max)).sum();
    let shift = max + libm::log(total);
    for l in log_weights.iter_mut() {
        *l -= shift;
    }
    Some(log_weights.iter().map(|&l| libm::exp(l)).collect())
}

fn ess_of(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().map(|w| w * w).sum();
    if s > 0.0 {
        1.0 / s
    } else {
        0.0
    }
}

/// Systematic resampling: indices of `n` draws whose multiplicities have mean `n·w_j`.
pub fn systematic_indices<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let step = total / n as f64;
    let mut u = rng.gen::<f64>() * step;
    let mut out = Vec::with_capacity(n);
    let mut cum = 0.0;
    let mut j = 0;
    for _ in 0..n {
        while j + 1 < weights.len() && cum + weights[j] <= u {
            cum += weights[j];
            j += 1;
        }
        out.push(j);
        u += step;
    }
    out
}

impl ParticleBelief {
    /// `n` particles drawn uniformly among boards consistent with `partial`, equally weighted.
    pub fn init<R: Rng + ?Sized>(
        config: &BoardConfig,
        partial: &PartialBoard,
        n: usize,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<Self, BeliefError> {
        check_epsilon(epsilon)?;
        if n == 0 {
            return Err(BeliefError::NoParticles);
        }
        let sampler = ConsistentSampler::new(config, partial)?;
        let fresh = partial.revealed().is_empty();
        let particles = (0..n)
            .map(|_| {
                sampler.draw(rng, CONSISTENT_MAX_TRIES).ok_or(if fresh {
                    BoardError::InfeasibleConfig
                } else {
                    BoardError::Depleted
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_particles(config.clone(), particles, epsilon))
    }

    /// Equally weighted belief over the given boards.
    pub fn from_particles(config: BoardConfig, particles: Vec<Board>, epsilon: f64) -> Self {
        let n = particles.len();
        let lw = -libm::log(n as f64);
        ParticleBelief {
            config,
            log_weights: alloc::vec![lw; n],
            weights: alloc::vec![1.0 / n as f64; n],
            particles,
            epsilon,
            replay_log: Vec::new(),
            target: n,
        }
    }

    pub fn config(&self) -> &BoardConfig {
        &self.config
    }

    pub fn particles(&self) -> &[Board] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn replay_log(&self) -> &[LoggedAnswer] {
        &self.replay_log
    }

    /// Effective sample size `1 / Σ w²`.
    pub fn ess(&self) -> f64 {
        ess_of(&self.weights)
    }

    pub fn answer_vector(&self, q: &Question, partial: &PartialBoard) -> AnswerVector {
        answer_vector(q, &self.particles, partial)
    }

    /// Weights after hearing `observed` for a question with answers `bits`, unnormalized
    /// factors applied; `None` if the result has no mass.
    pub fn reweighted(&self, bits: &AnswerVector, observed: bool) -> Option<Vec<f64>> {
        let mut lw = self.log_weights.clone();
        for (j, l) in lw.iter_mut().enumerate() {
            *l += ln_factor(bits.get(j) == observed, self.epsilon);
        }
        normalize(&mut lw)
    }

    /// Absorbs a noisy answer: `w_j ∝ w_j·[(1−ε)·1{ã = f(s_j)} + ε·1{ã ≠ f(s_j)}]`,
    /// resampling when the effective sample size drops below `N/2`.
    pub fn update_answer<R: Rng + ?Sized>(
        &mut self,
        q: &Question,
        observed: bool,
        partial: &PartialBoard,
        rng: &mut R,
    ) -> Result<(), BeliefError> {
        let bits = self.answer_vector(q, partial);
        let mut lw = self.log_weights.clone();
        for (j, l) in lw.iter_mut().enumerate() {
            *l += ln_factor(bits.get(j) == observed, self.epsilon);
        }
        let weights = normalize(&mut lw).ok_or(BeliefError::Depleted)?;
        self.log_weights = lw;
        self.weights = weights;
        self.replay_log.push(LoggedAnswer {
            question: q.clone(),
            answer: observed,
            view: partial.clone(),
        });
        if self.ess() < self.particles.len() as f64 / 2.0 {
            self.resample(rng);
        }
        Ok(())
    }

    /// Absorbs a tile reveal (hard evidence, including any sunk announcement in
    /// `partial_after`). Particles inconsistent with the new view are dropped;
    /// if the survivors' effective size falls below `N/2` the population is
    /// rejuvenated from fresh consistent boards weighted by the answer history.
    pub fn update_reveal<R: Rng + ?Sized>(
        &mut self,
        partial_after: &PartialBoard,
        rng: &mut R,
    ) -> Result<(), BeliefError> {
        let mut lw = self.log_weights.clone();
        for (l, b) in lw.iter_mut().zip(&self.particles) {
            if !consistent_unchecked(b, partial_after) {
                *l = f64::NEG_INFINITY;
            }
        }
        let survivors = normalize(&mut lw);
        let survivor_ess = survivors.as_deref().map_or(0.0, ess_of);
        if let Some(w) = survivors.as_ref() {
            let keep: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
            self.particles = keep.iter().map(|&j| self.particles[j].clone()).collect();
            self.log_weights = keep.iter().map(|&j| lw[j]).collect();
            self.weights = keep.iter().map(|&j| w[j]).collect();
        }
        if survivor_ess >= self.target as f64 / 2.0 {
            return Ok(());
        }
        self.rejuvenate(partial_after, survivors.is_some(), rng)
    }

    fn rejuvenate<R: Rng + ?Sized>(
        &mut self,
        partial: &PartialBoard,
        have_survivors: bool,
        rng: &mut R,
    ) -> Result<(), BeliefError> {
        let n = self.target;
        let sampler = ConsistentSampler::new(&self.config, partial)?;
        let mut fresh = Vec::with_capacity(n);
        for _ in 0..n {
            match sampler.draw(rng, CONSISTENT_MAX_TRIES) {
                Some(b) => fresh.push(b),
                None => break,
            }
        }
        if fresh.is_empty() {
            if !have_survivors {
                return Err(BeliefError::Depleted);
            }
            self.resample(rng);
            return Ok(());
        }
        let mut fresh_lw: Vec<f64> = fresh.iter().map(|b| self.log_likelihood(b)).collect();
        let Some(fresh_w) = normalize(&mut fresh_lw) else {
            if !have_survivors {
                return Err(BeliefError::Depleted);
            }
            self.resample(rng);
            return Ok(());
        };
        let (alpha, surv_w) = if have_survivors {
            let se = ess_of(&self.weights);
            let fe = ess_of(&fresh_w);
            (se / (se + fe), core::mem::take(&mut self.weights))
        } else {
            (0.0, Vec::new())
        };
        let mut pool: Vec<Board> = Vec::with_capacity(self.particles.len() + fresh.len());
        let mut pool_w: Vec<f64> = Vec::with_capacity(pool.capacity());
        if have_survivors {
            for (b, w) in core::mem::take(&mut self.particles).into_iter().zip(surv_w) {
                if w > 0.0 {
                    pool.push(b);
                    pool_w.push(alpha * w);
                }
            }
        }
        for (b, w) in fresh.into_iter().zip(fresh_w) {
            pool.push(b);
            pool_w.push((1.0 - alpha) * w);
        }
        let idx = systematic_indices(&pool_w, n, rng);
        self.particles = idx.into_iter().map(|i| pool[i].clone()).collect();
        self.reset_uniform();
        Ok(())
    }

    /// `Σ log Pr(ã | board)` over the answer history.
    pub fn log_likelihood(&self, board: &Board) -> f64 {
        self.replay_log
            .iter()
            .map(|entry| {
                let compiled = CompiledQuestion::new(&entry.question, board.rows(), board.cols());
                ln_factor(
                    compiled.eval(board, &entry.view) == entry.answer,
                    self.epsilon,
                )
            })
            .sum()
    }

    fn reset_uniform(&mut self) {
        let n = self.particles.len();
        self.log_weights = alloc::vec![-libm::log(n as f64); n];
        self.weights = alloc::vec![1.0 / n as f64; n];
    }

    /// Systematic resampling back to the target population size with equal weights.
    pub fn resample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let idx = systematic_indices(&self.weights, self.target, rng);
        self.particles = idx.into_iter().map(|i| self.particles[i].clone()).collect();
        self.reset_uniform();
    }

    /// `p̂ = Σ_j w_j·1{f(s_j) = 1}`.
    pub fn yes_probability(&self, q: &Question, partial: &PartialBoard) -> f64 {
        self.yes_probability_of(&self.answer_vector(q, partial))
    }

    pub fn yes_probability_of(&self, bits: &AnswerVector) -> f64 {
        bits.weighted_sum(&self.weights).clamp(0.0, 1.0)
    }

    /// Closed-form EIG of asking `q` through this belief's channel.
    pub fn eig(&self, q: &Question, partial: &PartialBoard) -> f64 {
        eig_from_yes_probability(self.yes_probability(q, partial), self.epsilon)
    }

    pub fn eig_of(&self, bits: &AnswerVector) -> f64 {
        eig_from_yes_probability(self.yes_probability_of(bits), self.epsilon)
    }

    pub fn hit_probability_grid(&self, partial: &PartialBoard) -> HitGrid {
        HitGrid::from_probs(
            partial.rows(),
            partial.cols(),
            hit_probs(&self.particles, &self.weights, partial),
        )
    }
}

/// `Σ_j w_j·1{tile is a ship in s_j}` for hidden tiles, 0 for revealed ones.
pub(crate) fn hit_probs(particles: &[Board], weights: &[f64], partial: &PartialBoard) -> Vec<f64> {
    let mut probs = alloc::vec![0.0; partial.cells()];
    let hidden = partial.hidden_cells();
    for (b, &w) in particles.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for i in b.occupied().intersection(&hidden).iter() {
            probs[i] += w;
        }
    }
    for p in &mut probs {
        *p = p.min(1.0);
    }
    probs
}
