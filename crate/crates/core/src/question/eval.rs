use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{Atom, Cmp, Question, Region};
use crate::board::{Board, PartialBoard};
use crate::cells::{CellSet, Color, Coord};

/// A question with its regions resolved to cell masks for a fixed grid size.
#[derive(Debug, Clone)]
pub struct CompiledQuestion {
    root: Node,
}

#[derive(Debug, Clone)]
enum Node {
    TileShip(Option<usize>),
    TileColor(Option<usize>, Color),
    AnyShip(CellSet),
    CountShip(CellSet, Cmp, u32),
    ShipLength(Color, Cmp, u32),
    ShipHorizontal(Color),
    ShipsTouching(Color, Color),
    AnyUnrevealedShip(CellSet),
    ShipSunk(Color),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
}

fn region_mask(region: &Region, rows: u8, cols: u8) -> CellSet {
    let cell = |c: Coord| c.in_bounds(rows, cols).then(|| c.index(cols));
    match region {
        Region::Rect(a, b) => {
            let (r0, r1) = (
                a.row.min(b.row),
                a.row.max(b.row).min(rows.saturating_sub(1)),
            );
            let (c0, c1) = (
                a.col.min(b.col),
                a.col.max(b.col).min(cols.saturating_sub(1)),
            );
            let mut set = CellSet::EMPTY;
            for r in r0..=r1 {
                for c in c0..=c1 {
                    if let Some(i) = cell(Coord::new(r, c)) {
                        set.insert(i);
                    }
                }
            }
            set
        }
        Region::Row(r) => (0..cols).filter_map(|c| cell(Coord::new(*r, c))).collect(),
        Region::Col(c) => (0..rows).filter_map(|r| cell(Coord::new(r, *c))).collect(),
        Region::Tiles(ts) => ts.iter().filter_map(|t| cell(*t)).collect(),
    }
}

impl CompiledQuestion {
    pub fn new(q: &Question, rows: u8, cols: u8) -> Self {
        CompiledQuestion {
            root: compile(q, rows, cols),
        }
    }

    #[inline]
    pub fn eval(&self, board: &Board, partial: &PartialBoard) -> bool {
        eval_node(&self.root, board, partial)
    }
}

fn compile(q: &Question, rows: u8, cols: u8) -> Node {
    let cell = |c: &Coord| c.in_bounds(rows, cols).then(|| c.index(cols));
    match q {
        Question::Atom(a) => match a {
            Atom::TileShip(c) => Node::TileShip(cell(c)),
            Atom::TileColor(c, color) => Node::TileColor(cell(c), *color),
            Atom::AnyShip(r) => Node::AnyShip(region_mask(r, rows, cols)),
            Atom::CountShip(r, cmp, k) => Node::CountShip(region_mask(r, rows, cols), *cmp, *k),
            Atom::ShipLength(c, cmp, k) => Node::ShipLength(*c, *cmp, *k),
            Atom::ShipHorizontal(c) => Node::ShipHorizontal(*c),
            Atom::ShipsTouching(a, b) => Node::ShipsTouching(*a, *b),
            Atom::AnyUnrevealedShip(r) => Node::AnyUnrevealedShip(region_mask(r, rows, cols)),
            Atom::ShipSunk(c) => Node::ShipSunk(*c),
        },
        Question::Not(q) => Node::Not(Box::new(compile(q, rows, cols))),
        Question::And(qs) => Node::And(qs.iter().map(|q| compile(q, rows, cols)).collect()),
        Question::Or(qs) => Node::Or(qs.iter().map(|q| compile(q, rows, cols)).collect()),
    }
}

fn eval_node(node: &Node, board: &Board, partial: &PartialBoard) -> bool {
    match node {
        Node::TileShip(i) => i.is_some_and(|i| board.occupied().contains(i)),
        Node::TileColor(i, color) => {
            i.is_some_and(|i| board.ship(*color).is_some_and(|s| s.cells.contains(i)))
        }
        Node::AnyShip(mask) => board.occupied().intersects(mask),
        Node::CountShip(mask, cmp, k) => {
            cmp.apply(board.occupied().intersection(mask).len() as u32, *k)
        }
        Node::ShipLength(color, cmp, k) => board
            .ship(*color)
            .is_some_and(|s| cmp.apply(s.placement.length as u32, *k)),
        Node::ShipHorizontal(color) => board.ship(*color).is_some_and(|s| s.placement.horizontal),
        Node::ShipsTouching(a, b) => {
            if a == b {
                return false;
            }
            match (board.ship(*a), board.ship(*b)) {
                (Some(sa), Some(sb)) => sa
                    .cells
                    .halo(board.rows(), board.cols())
                    .intersects(&sb.cells),
                _ => false,
            }
        }
        Node::AnyUnrevealedShip(mask) => {
            board
                .occupied()
                .intersection(mask)
                .difference(partial.revealed())
                .len()
                > 0
        }
        Node::ShipSunk(color) => board
            .ship(*color)
            .is_some_and(|s| s.cells.is_subset(partial.revealed())),
        Node::Not(n) => !eval_node(n, board, partial),
        Node::And(ns) => ns.iter().all(|n| eval_node(n, board, partial)),
        Node::Or(ns) => ns.iter().any(|n| eval_node(n, board, partial)),
    }
}

/// The noise-free answer of `q` on `board` given the captain's view.
pub fn evaluate(q: &Question, board: &Board, partial: &PartialBoard) -> bool {
    CompiledQuestion::new(q, board.rows(), board.cols()).eval(board, partial)
}

/// One answer bit per particle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnswerVector {
    words: Vec<u64>,
    len: usize,
}

impl AnswerVector {
    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        AnswerVector { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> AnswerVector {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if self.len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
        AnswerVector {
            words,
            len: self.len,
        }
    }

    /// Bits restricted to `mask` (bitwise and).
    pub fn masked(&self, mask: &AnswerVector) -> AnswerVector {
        let words = self
            .words
            .iter()
            .zip(&mask.words)
            .map(|(a, b)| a & b)
            .collect();
        AnswerVector {
            words,
            len: self.len,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|j| self.get(j))
    }

    /// `Σ_j w_j · bit_j`.
    pub fn weighted_sum(&self, weights: &[f64]) -> f64 {
        debug_assert_eq!(weights.len(), self.len);
        weights
            .iter()
            .enumerate()
            .filter(|(j, _)| self.get(*j))
            .map(|(_, w)| w)
            .sum()
    }
}

/// Evaluates `q` on every particle (bit `j` answers for `particles[j]`).
pub fn answer_vector(q: &Question, particles: &[Board], partial: &PartialBoard) -> AnswerVector {
    let compiled = CompiledQuestion::new(q, partial.rows(), partial.cols());
    AnswerVector::from_bits(particles.iter().map(|b| compiled.eval(b, partial)))
}
