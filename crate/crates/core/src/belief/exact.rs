//! Exact posterior by enumerating the feasible set; a test oracle for small boards.

use alloc::vec::Vec;

use super::{argmax_hidden, hit_probs, HitGrid, LoggedAnswer};
use crate::board::{enumerate_boards, Board, BoardConfig, PartialBoard};
use crate::question::{answer_vector, Question};

/// Largest feasible set [`exact_posterior`] will enumerate.
pub const EXACT_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct ExactPosterior {
    pub boards: Vec<Board>,
    pub probs: Vec<f64>,
}

/// Enumerates every board consistent with `partial`, applies the channel
/// likelihood of each logged answer and normalizes.
pub fn exact_posterior(
    config: &BoardConfig,
    partial: &PartialBoard,
    log: &[LoggedAnswer],
    epsilon: f64,
) -> Result<ExactPosterior, super::BeliefError> {
    let boards = enumerate_boards(config, partial, EXACT_LIMIT)?;
    let mut probs: Vec<f64> = boards
        .iter()
        .map(|b| {
            log.iter()
                .map(|entry| entry.likelihood(b, epsilon))
                .product()
        })
        .collect();
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(super::BeliefError::Depleted);
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(ExactPosterior { boards, probs })
}

impl ExactPosterior {
    pub fn yes_probability(&self, q: &Question, partial: &PartialBoard) -> f64 {
        answer_vector(q, &self.boards, partial).weighted_sum(&self.probs)
    }

    pub fn hit_grid(&self, partial: &PartialBoard) -> HitGrid {
        HitGrid::from_probs(
            partial.rows(),
            partial.cols(),
            hit_probs(&self.boards, &self.probs, partial),
        )
    }

    /// Posterior after hearing `observed` for `q` through a channel with flip rate `epsilon`.
    pub fn conditioned(
        &self,
        q: &Question,
        observed: bool,
        partial: &PartialBoard,
        epsilon: f64,
    ) -> Option<ExactPosterior> {
        let bits = answer_vector(q, &self.boards, partial);
        let mut probs: Vec<f64> = self
            .probs
            .iter()
            .enumerate()
            .map(|(j, p)| {
                p * if bits.get(j) == observed {
                    1.0 - epsilon
                } else {
                    epsilon
                }
            })
            .collect();
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return None;
        }
        for p in &mut probs {
            *p /= total;
        }
        Some(ExactPosterior {
            boards: self.boards.clone(),
            probs,
        })
    }

    /// Best hidden-tile hit probability.
    pub fn max_hit(&self, partial: &PartialBoard) -> f64 {
        argmax_hidden(self.hit_grid(partial).probs(), partial).map_or(0.0, |(_, p)| p)
    }
}
