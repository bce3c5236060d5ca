//! File formats, tournaments, the language-model adapter and the command line
//! for the `infoseek` Battleship and Guess Who experiments.

pub use infoseek_core as core;

pub mod llm;
pub mod config;
pub mod formats;
pub mod runner;
pub mod tournament;
pub mod interactive;
pub mod cli;
