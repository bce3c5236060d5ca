//! Parsers for model replies. Free text before the final `<answer>` tags is
//! ignored, so chain-of-thought replies parse the same as direct ones.

use std::collections::BTreeSet;

use infoseek_core::agent::DecisionKind;
use infoseek_core::guesswho::{AttrQuestion, Schema};
use infoseek_core::{Coord, Question};

use super::backend::AdapterError;

fn err(msg: impl Into<String>) -> AdapterError {
    AdapterError::Parse(msg.into())
}

/// Contents of the last `<answer>...</answer>` pair (tags case-insensitive).
pub fn extract_answer(text: &str) -> Option<&str> {
    let lower = text.to_ascii_lowercase();
    let open = lower.rfind("<answer>")?;
    let start = open + "<answer>".len();
    let end = start + lower[start..].find("</answer>")?;
    Some(text[start..end].trim())
}

fn answer(text: &str) -> Result<&str, AdapterError> {
    extract_answer(text).ok_or_else(|| err("no <answer></answer> tags"))
}

/// Strips one layer of surrounding brackets or quotes.
fn unwrap_token(s: &str) -> &str {
    let s = s.trim();
    for (a, b) in [('[', ']'), ('"', '"'), ('\'', '\''), ('`', '`')] {
        if s.len() >= 2 && s.starts_with(a) && s.ends_with(b) {
            return s[1..s.len() - 1].trim();
        }
    }
    s
}

pub fn parse_decision(text: &str) -> Result<DecisionKind, AdapterError> {
    let a = unwrap_token(answer(text)?).trim_end_matches('.');
    match a.to_ascii_lowercase().as_str() {
        "question" => Ok(DecisionKind::Question),
        "move" => Ok(DecisionKind::Move),
        other => Err(err(format!("expected Question or Move, got '{other}'"))),
    }
}

pub fn parse_coord(text: &str, rows: u8, cols: u8) -> Result<Coord, AdapterError> {
    let a = unwrap_token(answer(text)?).trim_end_matches('.');
    let c = Coord::parse(&a.to_ascii_uppercase()).ok_or_else(|| err(format!("'{a}' is not a coordinate")))?;
    if !c.in_bounds(rows, cols) {
        return Err(err(format!("{c} is outside the {rows}x{cols} board")));
    }
    Ok(c)
}

pub fn parse_yes_no(text: &str) -> Result<bool, AdapterError> {
    let a = unwrap_token(answer(text)?).trim_end_matches(['.', '!']);
    match a.to_ascii_lowercase().as_str() {
        "yes" => Ok(true),
        "no" => Ok(false),
        other => Err(err(format!("expected Yes or No, got '{other}'"))),
    }
}

pub fn parse_question(text: &str, rows: u8, cols: u8) -> Result<Question, AdapterError> {
    let a = unwrap_token(answer(text)?);
    Question::parse(a, rows, cols).map_err(|e| err(format!("'{a}': {e}")))
}

pub fn parse_attr_question(text: &str, schema: &Schema) -> Result<AttrQuestion, AdapterError> {
    let a = unwrap_token(answer(text)?);
    AttrQuestion::parse_for(a, schema).map_err(|e| err(format!("'{a}': {e}")))
}

/// Guessed name, with optional square brackets removed.
pub fn parse_guess(text: &str) -> Result<String, AdapterError> {
    let a = unwrap_token(answer(text)?);
    if a.is_empty() {
        return Err(err("empty guess"));
    }
    Ok(a.to_string())
}

/// Parsed batch plus a note for every entry that was dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub items: Vec<T>,
    pub warnings: Vec<String>,
}

/// Numbered JSON mapping inside the answer tags, in key order; unparseable
/// entries are dropped with a warning and duplicates (by canonical text) are
/// kept once. At most `k` items are returned; zero is an error.
fn parse_batch<T>(
    text: &str,
    k: usize,
    parse: impl Fn(&str) -> Result<T, String>,
    canonical: impl Fn(&T) -> String,
) -> Result<Batch<T>, AdapterError> {
    let a = answer(text)?;
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(a).map_err(|e| err(format!("batch is not a JSON object: {e}")))?;
    let mut keyed: Vec<(u64, String, serde_json::Value)> = Vec::new();
    let mut warnings = Vec::new();
    for (key, v) in map {
        match key.trim().parse::<u64>() {
            Ok(n) => keyed.push((n, key, v)),
            Err(_) => warnings.push(format!("entry '{key}': key is not a number")),
        }
    }
    keyed.sort_by_key(|(n, _, _)| *n);
    let mut seen = BTreeSet::new();
    let mut items = Vec::new();
    for (_, key, v) in keyed {
        let Some(s) = v.as_str() else {
            warnings.push(format!("entry {key}: not a string"));
            continue;
        };
        match parse(s) {
            Ok(q) => {
                if !seen.insert(canonical(&q)) {
                    warnings.push(format!("entry {key}: duplicate"));
                } else if items.len() < k {
                    items.push(q);
                }
            }
            Err(e) => warnings.push(format!("entry {key}: {e}")),
        }
    }
    if items.is_empty() {
        return Err(err(format!("no parseable questions ({})", warnings.join("; "))));
    }
    Ok(Batch { items, warnings })
}

pub fn parse_question_batch(text: &str, k: usize, rows: u8, cols: u8) -> Result<Batch<Question>, AdapterError> {
    parse_batch(
        text,
        k,
        |s| Question::parse(s, rows, cols).map_err(|e| e.to_string()),
        |q| q.canonical_text(),
    )
}

pub fn parse_attr_question_batch(text: &str, k: usize, schema: &Schema) -> Result<Batch<AttrQuestion>, AdapterError> {
    parse_batch(text, k, |s| AttrQuestion::parse_for(s, schema).map_err(|e| e.to_string()), |q| q.canonical_text())
}
