//! Executable yes/no questions about a board.
//!
//! A [`Question`] is a predicate over the true board and the captain's
//! partial view. Most atoms only look at the true board; the "stateful"
//! atoms ([`Atom::AnyUnrevealedShip`], [`Atom::ShipSunk`]) also consult the
//! partial view, so "is there a ship in row E?" can mean "one that has not
//! been found yet".
//!
//! Text form (case-insensitive s-expressions):
//!
//! ```text
//! question := atom | (not q) | (and q q+) | (or q q+)
//! atom     := (tile-ship E7) | (tile-color E7 red) | (any-ship REGION)
//!           | (count-ship REGION >= 2) | (ship-len red > 3) | (ship-horizontal red)
//!           | (ships-touching red green) | (any-unrevealed-ship REGION) | (ship-sunk red)
//! REGION   := (rect A1 C3) | (row C) | (col 4) | (tiles A1 B2 ...)
//! ```

mod candidates;
mod eval;
mod parse;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use candidates::{enumerate_candidates, CandidateSet, TemplatePool};
pub use eval::{answer_vector, evaluate, AnswerVector, CompiledQuestion};
pub use parse::QuestionError;

use crate::cells::{Color, Coord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cmp {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl Cmp {
    pub fn apply(self, lhs: u32, rhs: u32) -> bool {
        match self {
            Cmp::Eq => lhs == rhs,
            Cmp::Lt => lhs < rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Lt => "<",
            Cmp::Gt => ">",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Cmp> {
        Some(match s {
            "=" => Cmp::Eq,
            "<" => Cmp::Lt,
            ">" => Cmp::Gt,
            "<=" => Cmp::Le,
            ">=" => Cmp::Ge,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    /// Inclusive rectangle between two corners.
    Rect(Coord, Coord),
    Row(u8),
    Col(u8),
    Tiles(Vec<Coord>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    TileShip(Coord),
    TileColor(Coord, Color),
    AnyShip(Region),
    CountShip(Region, Cmp, u32),
    ShipLength(Color, Cmp, u32),
    ShipHorizontal(Color),
    ShipsTouching(Color, Color),
    AnyUnrevealedShip(Region),
    ShipSunk(Color),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Question {
    Atom(Atom),
    Not(Box<Question>),
    And(Vec<Question>),
    Or(Vec<Question>),
}

impl From<Atom> for Question {
    fn from(atom: Atom) -> Self {
        Question::Atom(atom)
    }
}

impl Question {
    pub fn not(q: Question) -> Question {
        Question::Not(Box::new(q))
    }

    pub fn and(a: Question, b: Question) -> Question {
        Question::And(alloc::vec![a, b])
    }

    pub fn or(a: Question, b: Question) -> Question {
        Question::Or(alloc::vec![a, b])
    }

    /// Parses and canonicalizes, rejecting coordinates outside a `rows`×`cols` board.
    pub fn parse(text: &str, rows: u8, cols: u8) -> Result<Question, QuestionError> {
        parse::parse_question(text, rows, cols)
    }

    /// Normal form: sorted region tiles and rectangle corners, sorted color
    /// pairs, and `and`/`or` children ordered by their canonical text.
    pub fn canonical(&self) -> Question {
        match self {
            Question::Atom(a) => Question::Atom(canonical_atom(a)),
            Question::Not(q) => Question::not(q.canonical()),
            Question::And(qs) => Question::And(sorted_children(qs)),
            Question::Or(qs) => Question::Or(sorted_children(qs)),
        }
    }

    /// Canonical text, also the deterministic tie-break key for selection.
    pub fn canonical_text(&self) -> String {
        self.canonical().to_string()
    }

    /// All coordinates and region bounds fit a `rows`×`cols` board.
    pub fn in_bounds(&self, rows: u8, cols: u8) -> bool {
        let c_ok = |c: &Coord| c.in_bounds(rows, cols);
        let r_ok = |r: &Region| match r {
            Region::Rect(a, b) => c_ok(a) && c_ok(b),
            Region::Row(r) => *r < rows,
            Region::Col(c) => *c < cols,
            Region::Tiles(ts) => !ts.is_empty() && ts.iter().all(c_ok),
        };
        match self {
            Question::Atom(a) => match a {
                Atom::TileShip(c) | Atom::TileColor(c, _) => c_ok(c),
                Atom::AnyShip(r) | Atom::CountShip(r, _, _) | Atom::AnyUnrevealedShip(r) => r_ok(r),
                _ => true,
            },
            Question::Not(q) => q.in_bounds(rows, cols),
            Question::And(qs) | Question::Or(qs) => {
                qs.len() >= 2 && qs.iter().all(|q| q.in_bounds(rows, cols))
            }
        }
    }

    /// Whether any atom reads the partial view.
    pub fn is_stateful(&self) -> bool {
        match self {
            Question::Atom(Atom::AnyUnrevealedShip(_) | Atom::ShipSunk(_)) => true,
            Question::Atom(_) => false,
            Question::Not(q) => q.is_stateful(),
            Question::And(qs) | Question::Or(qs) => qs.iter().any(Question::is_stateful),
        }
    }
}

fn sorted_children(qs: &[Question]) -> Vec<Question> {
    let mut keyed: Vec<(String, Question)> = qs
        .iter()
        .map(|q| {
            let c = q.canonical();
            (c.to_string(), c)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, q)| q).collect()
}

fn canonical_region(r: &Region) -> Region {
    match r {
        Region::Rect(a, b) => Region::Rect(
            Coord::new(a.row.min(b.row), a.col.min(b.col)),
            Coord::new(a.row.max(b.row), a.col.max(b.col)),
        ),
        Region::Tiles(ts) => {
            let mut ts = ts.clone();
            ts.sort();
            ts.dedup();
            Region::Tiles(ts)
        }
        other => other.clone(),
    }
}

fn canonical_atom(a: &Atom) -> Atom {
    match a {
        Atom::AnyShip(r) => Atom::AnyShip(canonical_region(r)),
        Atom::CountShip(r, cmp, k) => Atom::CountShip(canonical_region(r), *cmp, *k),
        Atom::AnyUnrevealedShip(r) => Atom::AnyUnrevealedShip(canonical_region(r)),
        Atom::ShipsTouching(x, y) => Atom::ShipsTouching((*x).min(*y), (*x).max(*y)),
        other => other.clone(),
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Rect(a, b) => write!(f, "(rect {a} {b})"),
            Region::Row(r) => write!(f, "(row {})", Coord::row_letter(*r)),
            Region::Col(c) => write!(f, "(col {})", *c as u32 + 1),
            Region::Tiles(ts) => {
                f.write_str("(tiles")?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::TileShip(c) => write!(f, "(tile-ship {c})"),
            Atom::TileColor(c, color) => write!(f, "(tile-color {c} {color})"),
            Atom::AnyShip(r) => write!(f, "(any-ship {r})"),
            Atom::CountShip(r, cmp, k) => write!(f, "(count-ship {r} {} {k})", cmp.symbol()),
            Atom::ShipLength(color, cmp, k) => write!(f, "(ship-len {color} {} {k})", cmp.symbol()),
            Atom::ShipHorizontal(color) => write!(f, "(ship-horizontal {color})"),
            Atom::ShipsTouching(a, b) => write!(f, "(ships-touching {a} {b})"),
            Atom::AnyUnrevealedShip(r) => write!(f, "(any-unrevealed-ship {r})"),
            Atom::ShipSunk(color) => write!(f, "(ship-sunk {color})"),
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Question::Atom(a) => a.fmt(f),
            Question::Not(q) => write!(f, "(not {q})"),
            Question::And(qs) | Question::Or(qs) => {
                f.write_str(if matches!(self, Question::And(_)) {
                    "(and"
                } else {
                    "(or"
                })?;
                for q in qs {
                    write!(f, " {q}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl serde::Serialize for Question {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&self.canonical())
    }
}

impl<'de> serde::Deserialize<'de> for Question {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(deserializer)?;
        Question::parse(&s, crate::cells::MAX_ROWS, u8::MAX).map_err(serde::de::Error::custom)
    }
}
