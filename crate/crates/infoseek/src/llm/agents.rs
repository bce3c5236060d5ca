//! Captain, spotter and guesser backed by a chat model.

use std::sync::Arc;

use infoseek_core::agent::{AgentError, CaptainView, DecisionKind, ExternalCaptain, ExternalSpotter};
use infoseek_core::guesswho::{AttrQuestion, ExternalGuesser, GuessEvent, Roster};
use infoseek_core::{Board, BoardConfig, Coord, PartialBoard, Question};

use super::backend::{AdapterError, ChatBackend, ChatMessage, ChatRequest, EndpointConfig};
use super::parse;
use super::prompts::{self, CaptainTask};

/// Shared plumbing: one user message per call, re-asked on unparseable output.
#[derive(Clone)]
pub struct ModelClient {
    backend: Arc<dyn ChatBackend>,
    model: String,
    temperature: Option<f64>,
    /// Extra attempts after a reply that fails to parse.
    pub parse_retries: u32,
    pub chain_of_thought: bool,
}

impl ModelClient {
    pub fn new(backend: Arc<dyn ChatBackend>, endpoint: &EndpointConfig) -> Self {
        ModelClient {
            backend,
            model: endpoint.model.clone(),
            temperature: endpoint.temperature,
            parse_retries: endpoint.max_retries,
            chain_of_thought: false,
        }
    }

    fn ask<T>(&self, prompt: String, parse: impl Fn(&str) -> Result<T, AdapterError>) -> Result<T, AgentError> {
        let request = ChatRequest {
            model: self.model.clone(),
            messages: vec![ChatMessage::user(prompt)],
            temperature: self.temperature,
        };
        let mut last = None;
        for attempt in 0..=self.parse_retries {
            let reply = self.backend.complete(&request).map_err(|e| AgentError::new(e.to_string()))?;
            match parse(&reply) {
                Ok(v) => return Ok(v),
                Err(e) => {
                    log::debug!("unparseable reply (attempt {}): {e}", attempt + 1);
                    last = Some(e);
                }
            }
        }
        Err(AgentError::new(last.map(|e| e.to_string()).unwrap_or_default()))
    }
}

pub struct LlmCaptain {
    client: ModelClient,
}

impl LlmCaptain {
    pub fn new(client: ModelClient) -> Self {
        LlmCaptain { client }
    }

    fn prompt(&self, view: &CaptainView<'_>, task: CaptainTask) -> String {
        prompts::captain_prompt(view, task, self.client.chain_of_thought)
    }
}

impl ExternalCaptain for LlmCaptain {
    fn decide(&mut self, view: &CaptainView<'_>) -> Result<DecisionKind, AgentError> {
        self.client.ask(self.prompt(view, CaptainTask::Decision), parse::parse_decision)
    }

    fn propose_move(&mut self, view: &CaptainView<'_>) -> Result<Coord, AgentError> {
        let (rows, cols) = (view.config.rows, view.config.cols);
        let partial = view.partial;
        self.client.ask(self.prompt(view, CaptainTask::Move), |r| {
            let c = parse::parse_coord(r, rows, cols)?;
            if partial.is_hidden(c) {
                Ok(c)
            } else {
                Err(AdapterError::Parse(format!("{c} is already revealed")))
            }
        })
    }

    fn propose_question(&mut self, view: &CaptainView<'_>) -> Result<Question, AgentError> {
        let (rows, cols) = (view.config.rows, view.config.cols);
        self.client.ask(self.prompt(view, CaptainTask::Question), |r| parse::parse_question(r, rows, cols))
    }

    fn propose_questions(&mut self, view: &CaptainView<'_>, k: usize) -> Result<Vec<Question>, AgentError> {
        let (rows, cols) = (view.config.rows, view.config.cols);
        let batch = self
            .client
            .ask(self.prompt(view, CaptainTask::QuestionBatch(k)), |r| parse::parse_question_batch(r, k, rows, cols))?;
        for w in &batch.warnings {
            log::debug!("question batch: {w}");
        }
        Ok(batch.items)
    }
}

pub struct LlmSpotter {
    client: ModelClient,
    config: BoardConfig,
}

impl LlmSpotter {
    pub fn new(client: ModelClient, config: BoardConfig) -> Self {
        LlmSpotter { client, config }
    }
}

impl ExternalSpotter for LlmSpotter {
    fn answer(&mut self, question: &Question, truth: &Board, partial: &PartialBoard) -> Result<bool, AgentError> {
        let prompt = prompts::spotter_prompt(&self.config, question, truth, partial, self.client.chain_of_thought);
        self.client.ask(prompt, parse::parse_yes_no)
    }
}

pub struct LlmGuesser {
    client: ModelClient,
    budget: u32,
}

impl LlmGuesser {
    pub fn new(client: ModelClient, budget: u32) -> Self {
        LlmGuesser { client, budget }
    }
}

impl ExternalGuesser for LlmGuesser {
    fn propose_question(
        &mut self,
        roster: &Roster,
        history: &[GuessEvent],
        questions_left: u32,
    ) -> Result<AttrQuestion, AgentError> {
        let prompt = prompts::gw_question_prompt(roster, history, self.budget, questions_left);
        self.client.ask(prompt, |r| parse::parse_attr_question(r, roster.schema()))
    }

    fn guess(&mut self, roster: &Roster, history: &[GuessEvent]) -> Result<String, AgentError> {
        let prompt = prompts::gw_guess_prompt(roster, history, self.budget);
        self.client.ask(prompt, |r| {
            let name = parse::parse_guess(r)?;
            roster
                .entities()
                .iter()
                .find(|e| e.name.eq_ignore_ascii_case(&name))
                .map(|e| e.name.clone())
                .ok_or_else(|| AdapterError::Parse(format!("'{name}' is not on the roster")))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    /// Replies from a fixed script, in order.
    struct Script(Mutex<Vec<&'static str>>);

    impl ChatBackend for Script {
        fn complete(&self, _: &ChatRequest) -> Result<String, AdapterError> {
            let mut s = self.0.lock().unwrap();
            if s.is_empty() {
                return Err(AdapterError::CassetteMiss);
            }
            Ok(s.remove(0).to_string())
        }
    }

    fn client(replies: Vec<&'static str>, retries: u32) -> ModelClient {
        let endpoint = EndpointConfig { max_retries: retries, ..Default::default() };
        ModelClient::new(Arc::new(Script(Mutex::new(replies))), &endpoint)
    }

    #[test]
    fn captain_retries_unparseable_replies() {
        let config = BoardConfig::default();
        let partial = PartialBoard::for_config(&config);
        let view = CaptainView { config: &config, partial: &partial, questions_left: 3, moves_left: 3, history: &[] };
        let mut cap = LlmCaptain::new(client(vec!["I think B3", "<answer>Z0</answer>", "<answer>B3</answer>"], 2));
        assert_eq!(cap.propose_move(&view).unwrap(), Coord::new(1, 2));

        let mut cap = LlmCaptain::new(client(vec!["nope", "still nope"], 1));
        assert!(cap.propose_move(&view).is_err());
    }

    #[test]
    fn guesser_matches_names_case_insensitively() {
        use infoseek_core::guesswho::{AttrValue, Entity};
        let e = |n: &str, g: &str| Entity {
            name: n.into(),
            attributes: [("gender".to_string(), AttrValue::One(g.into()))].into_iter().collect(),
        };
        let roster = Roster::new(vec![e("Alex", "male"), e("Elena", "female")]).unwrap();
        let mut g = LlmGuesser::new(client(vec!["<answer>[elena]</answer>"], 0), 3);
        assert_eq!(g.guess(&roster, &[]).unwrap(), "Elena");
        let mut g = LlmGuesser::new(client(vec!["<answer>Bob</answer>"], 0), 3);
        assert!(g.guess(&roster, &[]).is_err());
    }
}
