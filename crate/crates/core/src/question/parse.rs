use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Atom, Cmp, Question, Region};
use crate::cells::{Color, Coord};
use crate::sexpr::{self, SExpr, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuestionError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("out of bounds at {pos}: {what}")]
    OutOfBounds { pos: usize, what: String },
}

impl QuestionError {
    pub fn pos(&self) -> usize {
        match self {
            QuestionError::Syntax(e) => e.pos,
            QuestionError::OutOfBounds { pos, .. } => *pos,
        }
    }
}

struct Parser {
    rows: u8,
    cols: u8,
}

pub(super) fn parse_question(text: &str, rows: u8, cols: u8) -> Result<Question, QuestionError> {
    let lowered = text.to_ascii_lowercase();
    let expr = sexpr::read(&lowered)?;
    let q = Parser { rows, cols }.question(&expr)?;
    Ok(q.canonical())
}

fn err(pos: usize, msg: impl Into<String>) -> QuestionError {
    QuestionError::Syntax(SyntaxError::new(pos, msg))
}

impl Parser {
    fn question(&self, e: &SExpr) -> Result<Question, QuestionError> {
        let (head, args) = e
            .as_form()
            .ok_or_else(|| err(e.pos(), "expected a parenthesized form"))?;
        match head {
            "not" => {
                let [q] = args else {
                    return Err(err(e.pos(), "not takes exactly one question"));
                };
                Ok(Question::Not(Box::new(self.question(q)?)))
            }
            "and" | "or" => {
                if args.len() < 2 {
                    return Err(err(e.pos(), format!("{head} needs at least two questions")));
                }
                let qs = args
                    .iter()
                    .map(|a| self.question(a))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(if head == "and" {
                    Question::And(qs)
                } else {
                    Question::Or(qs)
                })
            }
            _ => Ok(Question::Atom(self.atom(head, args, e.pos())?)),
        }
    }

    fn atom(&self, head: &str, args: &[SExpr], pos: usize) -> Result<Atom, QuestionError> {
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(pos, format!("{head} takes {n} argument(s)")))
            }
        };
        Ok(match head {
            "tile-ship" => {
                arity(1)?;
                Atom::TileShip(self.coord(&args[0])?)
            }
            "tile-color" => {
                arity(2)?;
                Atom::TileColor(self.coord(&args[0])?, color(&args[1])?)
            }
            "any-ship" => {
                arity(1)?;
                Atom::AnyShip(self.region(&args[0])?)
            }
            "count-ship" => {
                arity(3)?;
                Atom::CountShip(self.region(&args[0])?, cmp(&args[1])?, int(&args[2])?)
            }
            "ship-len" => {
                arity(3)?;
                Atom::ShipLength(color(&args[0])?, cmp(&args[1])?, int(&args[2])?)
            }
            "ship-horizontal" => {
                arity(1)?;
                Atom::ShipHorizontal(color(&args[0])?)
            }
            "ships-touching" => {
                arity(2)?;
                Atom::ShipsTouching(color(&args[0])?, color(&args[1])?)
            }
            "any-unrevealed-ship" => {
                arity(1)?;
                Atom::AnyUnrevealedShip(self.region(&args[0])?)
            }
            "ship-sunk" => {
                arity(1)?;
                Atom::ShipSunk(color(&args[0])?)
            }
            other => return Err(err(pos, format!("unknown form '{other}'"))),
        })
    }

    fn region(&self, e: &SExpr) -> Result<Region, QuestionError> {
        let (head, args) = e
            .as_form()
            .ok_or_else(|| err(e.pos(), "expected a region form"))?;
        match head {
            "rect" => match args {
                [a, b] => Ok(Region::Rect(self.coord(a)?, self.coord(b)?)),
                _ => Err(err(e.pos(), "rect takes two coordinates")),
            },
            "row" => match args {
                [r] => {
                    let text = atom_text(r)?;
                    let b = text.as_bytes();
                    if b.len() != 1 || !b[0].is_ascii_lowercase() {
                        return Err(err(r.pos(), "row expects a letter"));
                    }
                    let row = b[0] - b'a';
                    if row >= self.rows {
                        return Err(oob(r));
                    }
                    Ok(Region::Row(row))
                }
                _ => Err(err(e.pos(), "row takes one letter")),
            },
            "col" => match args {
                [c] => {
                    let n = int(c)?;
                    if n == 0 || n > self.cols as u32 {
                        return Err(oob(c));
                    }
                    Ok(Region::Col((n - 1) as u8))
                }
                _ => Err(err(e.pos(), "col takes one number")),
            },
            "tiles" => {
                if args.is_empty() {
                    return Err(err(e.pos(), "tiles needs at least one coordinate"));
                }
                Ok(Region::Tiles(
                    args.iter()
                        .map(|a| self.coord(a))
                        .collect::<Result<_, _>>()?,
                ))
            }
            other => Err(err(e.pos(), format!("unknown region '{other}'"))),
        }
    }

    fn coord(&self, e: &SExpr) -> Result<Coord, QuestionError> {
        let text = atom_text(e)?;
        let c =
            Coord::parse(text).ok_or_else(|| err(e.pos(), format!("bad coordinate '{text}'")))?;
        if !c.in_bounds(self.rows, self.cols) {
            return Err(oob(e));
        }
        Ok(c)
    }
}

fn oob(e: &SExpr) -> QuestionError {
    QuestionError::OutOfBounds {
        pos: e.pos(),
        what: String::from(e.as_atom().unwrap_or("?")).to_ascii_uppercase(),
    }
}

fn atom_text(e: &SExpr) -> Result<&str, QuestionError> {
    e.as_atom().ok_or_else(|| err(e.pos(), "expected a symbol"))
}

fn color(e: &SExpr) -> Result<Color, QuestionError> {
    let text = atom_text(e)?;
    text.parse()
        .map_err(|_| err(e.pos(), format!("unknown color '{text}'")))
}

fn cmp(e: &SExpr) -> Result<Cmp, QuestionError> {
    let text = atom_text(e)?;
    Cmp::from_symbol(text).ok_or_else(|| err(e.pos(), format!("unknown comparison '{text}'")))
}

fn int(e: &SExpr) -> Result<u32, QuestionError> {
    let text = atom_text(e)?;
    text.parse()
        .map_err(|_| err(e.pos(), format!("expected a number, got '{text}'")))
}
