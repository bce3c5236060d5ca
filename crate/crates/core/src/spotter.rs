//! The answering side: an exact oracle, a binary symmetric channel, or an
//! external answerer.

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentError, ExternalSpotter};
use crate::board::{Board, PartialBoard};
use crate::question::{evaluate, Question};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelTag {
    Oracle,
    Noisy,
    External,
    ExternalFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpotterAnswer {
    pub value: bool,
    /// The noise-free answer.
    pub truth: bool,
    pub channel: ChannelTag,
    /// Why the external answerer was bypassed, if it was.
    pub fallback: Option<String>,
}

pub enum SpotterChannel {
    Oracle,
    /// Flips the true answer with probability `epsilon`, independently per call.
    Noisy {
        epsilon: f64,
    },
    External {
        agent: Box<dyn ExternalSpotter + Send>,
        fallback_to_oracle: bool,
    },
}

impl fmt::Debug for SpotterChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpotterChannel::Oracle => f.write_str("Oracle"),
            SpotterChannel::Noisy { epsilon } => write!(f, "Noisy({epsilon})"),
            SpotterChannel::External {
                fallback_to_oracle, ..
            } => {
                write!(f, "External(fallback={fallback_to_oracle})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpotterError {
    #[error("epsilon {0} outside [0, 0.5]")]
    InvalidEpsilon(f64),
    #[error("external spotter failed: {0}")]
    External(#[from] AgentError),
}

impl SpotterChannel {
    pub fn noisy(epsilon: f64) -> Result<Self, SpotterError> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(SpotterError::InvalidEpsilon(epsilon));
        }
        Ok(SpotterChannel::Noisy { epsilon })
    }

    pub fn answer<R: Rng + ?Sized>(
        &mut self,
        q: &Question,
        board: &Board,
        partial: &PartialBoard,
        rng: &mut R,
    ) -> Result<SpotterAnswer, SpotterError> {
        let truth = evaluate(q, board, partial);
        match self {
            SpotterChannel::Oracle => Ok(SpotterAnswer {
                value: truth,
                truth,
                channel: ChannelTag::Oracle,
                fallback: None,
            }),
            SpotterChannel::Noisy { epsilon } => {
                let flip = *epsilon > 0.0 && rng.gen::<f64>() < *epsilon;
                Ok(SpotterAnswer {
                    value: truth ^ flip,
                    truth,
                    channel: ChannelTag::Noisy,
                    fallback: None,
                })
            }
            SpotterChannel::External {
                agent,
                fallback_to_oracle,
            } => match agent.answer(q, board, partial) {
                Ok(value) => Ok(SpotterAnswer {
                    value,
                    truth,
                    channel: ChannelTag::External,
                    fallback: None,
                }),
                Err(e) if *fallback_to_oracle => Ok(SpotterAnswer {
                    value: truth,
                    truth,
                    channel: ChannelTag::ExternalFallback,
                    fallback: Some(e.0),
                }),
                Err(e) => Err(e.into()),
            },
        }
    }
}
