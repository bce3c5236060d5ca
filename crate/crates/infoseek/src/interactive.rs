//! A captain typed at the terminal: a DSL question in parentheses asks, a
//! coordinate fires.

use std::io::{BufRead, Write};

use infoseek_core::agent::{AgentError, CaptainView, DecisionKind, ExternalCaptain};
use infoseek_core::engine::Event;
use infoseek_core::{Coord, Question};

use crate::llm::prompts::partial_grid;

enum Pending {
    Ask(Question),
    Fire(Coord),
}

pub struct TerminalCaptain<R, W> {
    input: R,
    output: W,
    pending: Option<Pending>,
    shown: usize,
}

impl<R: BufRead, W: Write> TerminalCaptain<R, W> {
    pub fn new(input: R, output: W) -> Self {
        TerminalCaptain { input, output, pending: None, shown: 0 }
    }

    fn say(&mut self, text: &str) {
        let _ = writeln!(self.output, "{text}");
        let _ = self.output.flush();
    }

    /// Echoes answers and shots since the last turn.
    fn catch_up(&mut self, history: &[Event]) {
        let fresh: Vec<String> = history[self.shown.min(history.len())..]
            .iter()
            .filter_map(|e| match e {
                Event::Answer { value, .. } => Some(format!("Spotter: {}", if *value { "Yes" } else { "No" })),
                Event::Shot { coord, hit, sunk, .. } => Some(match (hit, sunk) {
                    (true, Some(c)) => format!("{coord}: hit, {c} ship sunk"),
                    (true, None) => format!("{coord}: hit"),
                    _ => format!("{coord}: miss"),
                }),
                Event::Fallback { reason, .. } => Some(format!("(ignored: {reason})")),
                _ => None,
            })
            .collect();
        self.shown = history.len();
        for line in fresh {
            self.say(&line);
        }
    }

    fn read_action(&mut self, view: &CaptainView<'_>) -> Result<Pending, AgentError> {
        self.catch_up(view.history);
        self.say(&format!(
            "\n{}\nquestions left {}, shots left {}",
            partial_grid(view.partial),
            view.questions_left,
            view.moves_left
        ));
        loop {
            let _ = write!(self.output, "> ");
            let _ = self.output.flush();
            let mut line = String::new();
            let n = self.input.read_line(&mut line).map_err(|e| AgentError::new(e.to_string()))?;
            let line = line.trim();
            if n == 0 || line.eq_ignore_ascii_case("quit") {
                return Err(AgentError::new("captain quit"));
            }
            if line.starts_with('(') {
                if view.questions_left == 0 {
                    self.say("no questions left; fire at a tile");
                    continue;
                }
                match Question::parse(line, view.config.rows, view.config.cols) {
                    Ok(q) => return Ok(Pending::Ask(q)),
                    Err(e) => self.say(&format!("bad question: {e}")),
                }
            } else {
                match Coord::parse(&line.to_ascii_uppercase()) {
                    Some(c) if c.in_bounds(view.config.rows, view.config.cols) && view.partial.is_hidden(c) => {
                        return Ok(Pending::Fire(c))
                    }
                    Some(c) if c.in_bounds(view.config.rows, view.config.cols) => {
                        self.say(&format!("{c} is already revealed"))
                    }
                    _ => self.say("type a question like (any-ship (row C)) or a tile like C4"),
                }
            }
        }
    }

    fn take(&mut self, view: &CaptainView<'_>) -> Result<Pending, AgentError> {
        match self.pending.take() {
            Some(p) => Ok(p),
            None => self.read_action(view),
        }
    }
}

impl<R: BufRead, W: Write> ExternalCaptain for TerminalCaptain<R, W> {
    fn decide(&mut self, view: &CaptainView<'_>) -> Result<DecisionKind, AgentError> {
        let p = self.read_action(view)?;
        let kind = match p {
            Pending::Ask(_) => DecisionKind::Question,
            Pending::Fire(_) => DecisionKind::Move,
        };
        self.pending = Some(p);
        Ok(kind)
    }

    fn propose_move(&mut self, view: &CaptainView<'_>) -> Result<Coord, AgentError> {
        loop {
            if let Pending::Fire(c) = self.take(view)? {
                return Ok(c);
            }
            self.say("a tile is needed now");
        }
    }

    fn propose_question(&mut self, view: &CaptainView<'_>) -> Result<Question, AgentError> {
        loop {
            if let Pending::Ask(q) = self.take(view)? {
                return Ok(q);
            }
            self.say("a question is needed now");
        }
    }

    fn propose_questions(&mut self, view: &CaptainView<'_>, _k: usize) -> Result<Vec<Question>, AgentError> {
        Ok(vec![self.propose_question(view)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use infoseek_core::{BoardConfig, PartialBoard};

    #[test]
    fn typed_lines_become_actions() {
        let config = BoardConfig::default();
        let partial = PartialBoard::for_config(&config);
        let view = CaptainView { config: &config, partial: &partial, questions_left: 1, moves_left: 5, history: &[] };
        let input = "(bogus)\n(any-ship (row C))\nZ9\nc4\nquit\n";
        let mut out = Vec::new();
        let mut cap = TerminalCaptain::new(input.as_bytes(), &mut out);
        assert_eq!(cap.decide(&view).unwrap(), DecisionKind::Question);
        assert_eq!(cap.propose_question(&view).unwrap().to_string(), "(any-ship (row C))");
        assert_eq!(cap.decide(&view).unwrap(), DecisionKind::Move);
        assert_eq!(cap.propose_move(&view).unwrap(), Coord::new(2, 3));
        assert!(cap.decide(&view).is_err());
        let shown = String::from_utf8(out).unwrap();
        assert!(shown.contains("bad question"));
        assert!(shown.contains("questions left 1"));
    }
}
