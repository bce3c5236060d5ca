//! Minimal s-expression reader shared by the question languages.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(pos: usize, msg: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom { text: String, pos: usize },
    List { items: Vec<SExpr>, pos: usize },
}

impl SExpr {
    pub fn pos(&self) -> usize {
        match self {
            SExpr::Atom { pos, .. } | SExpr::List { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    /// `(head args...)` with a symbol head.
    pub fn as_form(&self) -> Option<(&str, &[SExpr])> {
        match self {
            SExpr::List { items, .. } => match items.split_first() {
                Some((SExpr::Atom { text, .. }, rest)) => Some((text.as_str(), rest)),
                _ => None,
            },
            SExpr::Atom { .. } => None,
        }
    }
}

/// Reads exactly one expression; trailing input is an error.
pub fn read(input: &str) -> Result<SExpr, SyntaxError> {
    let bytes = input.as_bytes();
    let mut pos = 0;
    let expr = read_expr(input, bytes, &mut pos)?;
    skip_ws(bytes, &mut pos);
    if pos != bytes.len() {
        return Err(SyntaxError::new(pos, "unexpected trailing input"));
    }
    Ok(expr)
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn read_expr(input: &str, bytes: &[u8], pos: &mut usize) -> Result<SExpr, SyntaxError> {
    skip_ws(bytes, pos);
    let start = *pos;
    match bytes.get(start) {
        None => Err(SyntaxError::new(start, "unexpected end of input")),
        Some(b')') => Err(SyntaxError::new(start, "unexpected ')'")),
        Some(b'(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(bytes, pos);
                match bytes.get(*pos) {
                    None => return Err(SyntaxError::new(*pos, "unclosed '('")),
                    Some(b')') => {
                        *pos += 1;
                        return Ok(SExpr::List { items, pos: start });
                    }
                    Some(_) => items.push(read_expr(input, bytes, pos)?),
                }
            }
        }
        Some(b'"') => {
            *pos += 1;
            let begin = *pos;
            while *pos < bytes.len() && bytes[*pos] != b'"' {
                *pos += 1;
            }
            if *pos == bytes.len() {
                return Err(SyntaxError::new(start, "unterminated string"));
            }
            let text = input[begin..*pos].into();
            *pos += 1;
            Ok(SExpr::Atom { text, pos: start })
        }
        Some(_) => {
            while *pos < bytes.len()
                && !bytes[*pos].is_ascii_whitespace()
                && bytes[*pos] != b'('
                && bytes[*pos] != b')'
            {
                *pos += 1;
            }
            Ok(SExpr::Atom {
                text: input[start..*pos].into(),
                pos: start,
            })
        }
    }
}
