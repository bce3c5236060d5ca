//! Prompt templates and their rendering. Templates live under `prompts/v1`
//! and use `{{name}}` placeholders.

use std::fmt::Write as _;

use infoseek_core::agent::CaptainView;
use infoseek_core::engine::Event;
use infoseek_core::guesswho::{AttrValue, GuessEvent, Roster};
use infoseek_core::{Board, BoardConfig, Color, Coord, PartialBoard, Question};

pub const PROMPT_VERSION: &str = "v1";

macro_rules! template {
    ($name:literal) => {
        include_str!(concat!("../../prompts/v1/", $name, ".txt"))
    };
}

const GAME_SETUP: &str = template!("game_setup");
const SHIP_UNSUNK: &str = template!("ship_unsunk");
const SHIP_SUNK: &str = template!("ship_sunk");
const CAPTAIN: &str = template!("captain");
const TASK_DECISION: &str = template!("task_decision");
const TASK_MOVE: &str = template!("task_move");
const TASK_QUESTION: &str = template!("task_question");
const TASK_QUESTION_BATCH: &str = template!("task_question_batch");
const DSL_BATTLESHIP: &str = template!("dsl_battleship");
const REASONING_DIRECT: &str = template!("reasoning_direct");
const REASONING_COT: &str = template!("reasoning_cot");
const SPOTTER: &str = template!("spotter");
const SPOTTER_DIRECT: &str = template!("spotter_direct");
const GW_SYSTEM: &str = template!("gw_system");
const GW_GUESS: &str = template!("gw_guess");
const GW_QUESTION: &str = template!("gw_question");
const GW_QUESTION_BATCH: &str = template!("gw_question_batch");
const DSL_GUESSWHO: &str = template!("dsl_guesswho");

/// Substitutes every `{{key}}`; unknown placeholders are left as they are.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.trim_end().to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{{{k}}}}}"), v.trim_end());
    }
    out
}

/// How the captain task is phrased.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaptainTask {
    Decision,
    Move,
    Question,
    QuestionBatch(usize),
}

/// Numpy-style rendering of a grid of symbols.
pub fn numpy_grid(rows: u8, cols: u8, symbol: impl Fn(usize) -> i8) -> String {
    let mut out = String::from("[");
    for r in 0..rows as usize {
        out.push_str(if r == 0 { "[" } else { " [" });
        for c in 0..cols as usize {
            if c > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:>2}", symbol(r * cols as usize + c));
        }
        out.push(']');
        if r + 1 < rows as usize {
            out.push('\n');
        }
    }
    out.push(']');
    out
}

pub fn partial_grid(partial: &PartialBoard) -> String {
    numpy_grid(partial.rows(), partial.cols(), |i| partial.get_at(i).symbol())
}

pub fn board_grid(board: &Board) -> String {
    numpy_grid(board.rows(), board.cols(), |i| board.cell_at(i).symbol())
}

fn join_words(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        n => format!("{} and {}", items[..n - 1].join(", "), items[n - 1]),
    }
}

fn sunk_colors(partial: &PartialBoard, config: &BoardConfig) -> Vec<Color> {
    config.ships.iter().map(|s| s.color).filter(|c| partial.is_sunk(*c)).collect()
}

/// One sentence per ship length, saying which are sunk. A sunk ship's length
/// is the number of its revealed tiles.
fn ship_tracker(partial: &PartialBoard, config: &BoardConfig) -> String {
    if !partial.tracks_sunk() {
        return String::new();
    }
    let mut remaining = config.lengths_sorted();
    let mut lines = Vec::new();
    for color in sunk_colors(partial, config) {
        let len = partial.revealed_color(color).len() as u8;
        if let Some(i) = remaining.iter().position(|l| *l == len) {
            remaining.remove(i);
        }
        lines.push(render(SHIP_SUNK, &[("length", &len.to_string()), ("color", &format!("{} ship", color.title()))]));
    }
    for len in remaining {
        lines.push(render(SHIP_UNSUNK, &[("length", &len.to_string())]));
    }
    lines.join(" ")
}

pub fn game_setup(config: &BoardConfig, partial: &PartialBoard) -> String {
    let lengths = config.lengths_sorted();
    let rows: Vec<String> = (0..config.rows).map(|r| Coord::row_letter(r).to_string()).collect();
    let cols: Vec<String> = (1..=config.cols).map(|c| c.to_string()).collect();
    let names: Vec<String> = config.ships.iter().map(|s| format!("{} ship", s.color.title())).collect();
    let lens: Vec<String> = lengths.iter().map(|l| l.to_string()).collect();
    render(
        GAME_SETUP,
        &[
            ("rows", &config.rows.to_string()),
            ("cols", &config.cols.to_string()),
            ("row_letters", &format!("{}-{}", rows[0], rows[rows.len() - 1])),
            ("col_numbers", &format!("{}-{}", cols[0], cols[cols.len() - 1])),
            ("ship_count", &config.ships.len().to_string()),
            ("ship_names", &join_words(&names)),
            ("min_length", &lengths.first().copied().unwrap_or(0).to_string()),
            ("max_length", &lengths.last().copied().unwrap_or(0).to_string()),
            ("lengths", &join_words(&lens)),
            ("ship_tracker", &ship_tracker(partial, config)),
        ],
    )
}

/// Question/answer pairs asked so far, oldest first.
pub fn captain_history(history: &[Event]) -> String {
    let mut out = String::new();
    let mut pending: Option<&Question> = None;
    for e in history {
        match e {
            Event::Question { question, .. } => pending = Some(question),
            Event::Answer { value, .. } => {
                if let Some(q) = pending.take() {
                    let _ = writeln!(out, "Captain (question): {q}\nSpotter (answer): {}", if *value { "Yes" } else { "No" });
                }
            }
            _ => {}
        }
    }
    if out.is_empty() {
        "No questions have been asked yet.".into()
    } else {
        format!("Questions asked so far:\n{out}")
    }
}

pub fn captain_prompt(view: &CaptainView<'_>, task: CaptainTask, chain_of_thought: bool) -> String {
    let task_text = match task {
        CaptainTask::Decision => TASK_DECISION.to_string(),
        CaptainTask::Move => TASK_MOVE.to_string(),
        CaptainTask::Question => format!("{}\n\n{}", TASK_QUESTION.trim_end(), DSL_BATTLESHIP),
        CaptainTask::QuestionBatch(k) => {
            format!("{}\n\n{}", render(TASK_QUESTION_BATCH, &[("k", &k.to_string())]), DSL_BATTLESHIP)
        }
    };
    let sunk: Vec<String> = sunk_colors(view.partial, view.config).iter().map(|c| c.title().to_string()).collect();
    let sunk_status = if !view.partial.tracks_sunk() {
        "not tracked".to_string()
    } else if sunk.is_empty() {
        "no ships sunk yet".to_string()
    } else {
        format!("sunk: {}", sunk.join(", "))
    };
    render(
        CAPTAIN,
        &[
            ("game_setup", &game_setup(view.config, view.partial)),
            ("board", &partial_grid(view.partial)),
            ("history", &captain_history(view.history)),
            ("task", &task_text),
            ("questions_remaining", &view.questions_left.to_string()),
            ("moves_remaining", &view.moves_left.to_string()),
            ("sunk_status", &sunk_status),
            ("reasoning", if chain_of_thought { REASONING_COT } else { REASONING_DIRECT }),
        ],
    )
}

pub fn spotter_prompt(
    config: &BoardConfig,
    question: &Question,
    truth: &Board,
    partial: &PartialBoard,
    chain_of_thought: bool,
) -> String {
    render(
        SPOTTER,
        &[
            ("game_setup", &game_setup(config, partial)),
            ("partial_board", &partial_grid(partial)),
            ("true_board", &board_grid(truth)),
            ("dsl", DSL_BATTLESHIP),
            ("variant", SPOTTER_DIRECT),
            ("reasoning", if chain_of_thought { REASONING_COT } else { "" }),
            ("question", &question.to_string()),
        ],
    )
}

fn attr_text(v: &AttrValue) -> String {
    match v {
        AttrValue::One(s) => s.clone(),
        AttrValue::Many(vs) if vs.is_empty() => "none".into(),
        AttrValue::Many(vs) => format!("[{}]", vs.join(", ")),
    }
}

pub fn roster_listing(roster: &Roster) -> String {
    let mut out = String::new();
    for e in roster.entities() {
        let attrs: Vec<String> = e.attributes.iter().map(|(k, v)| format!("{k}: {}", attr_text(v))).collect();
        let _ = writeln!(out, "{} ({})", e.name, attrs.join("; "));
    }
    out
}

pub fn guess_history(history: &[GuessEvent]) -> String {
    let mut out = String::new();
    let mut pending = None;
    for e in history {
        match e {
            GuessEvent::Question { question, .. } => pending = Some(question),
            GuessEvent::Answer { value, .. } => {
                if let Some(q) = pending.take() {
                    let _ = writeln!(out, "Q: {q}\nA: {}", if *value { "yes" } else { "no" });
                }
            }
            _ => {}
        }
    }
    if out.is_empty() {
        "No questions asked yet.".into()
    } else {
        out
    }
}

fn gw_context(roster: &Roster, history: &[GuessEvent], budget: u32) -> String {
    render(
        GW_SYSTEM,
        &[
            ("budget", &budget.to_string()),
            ("history", &guess_history(history)),
            ("characters", &roster_listing(roster)),
        ],
    )
}

pub fn gw_question_prompt(roster: &Roster, history: &[GuessEvent], budget: u32, questions_left: u32) -> String {
    render(
        GW_QUESTION,
        &[
            ("context", &gw_context(roster, history, budget)),
            ("remaining_questions", &questions_left.to_string()),
            ("dsl", DSL_GUESSWHO),
        ],
    )
}

pub fn gw_question_batch_prompt(
    roster: &Roster,
    history: &[GuessEvent],
    budget: u32,
    questions_left: u32,
    k: usize,
) -> String {
    render(
        GW_QUESTION_BATCH,
        &[
            ("context", &gw_context(roster, history, budget)),
            ("remaining_questions", &questions_left.to_string()),
            ("k", &k.to_string()),
            ("dsl", DSL_GUESSWHO),
        ],
    )
}

pub fn gw_guess_prompt(roster: &Roster, history: &[GuessEvent], budget: u32) -> String {
    render(GW_GUESS, &[("context", &gw_context(roster, history, budget))])
}
