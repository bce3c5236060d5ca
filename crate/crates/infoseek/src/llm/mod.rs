//! Chat-model adapter: HTTP backend, record/replay cassettes, prompts and
//! reply parsers, and the model-driven agents built on them.

pub mod agents;
pub mod backend;
pub mod cassette;
pub mod limiter;
pub mod parse;
pub mod prompts;

pub use agents::{LlmCaptain, LlmGuesser, LlmSpotter, ModelClient};
pub use backend::{AdapterError, ChatBackend, ChatMessage, ChatRequest, EndpointConfig, HttpBackend};
pub use cassette::{Cassette, CassetteFile};
pub use limiter::RateLimiter;
