//! Boards, fog-of-war views, the uniform board prior and the text codec.
//!
//! A [`Board`] is the hidden truth: one straight ship per configured color.
//! A [`PartialBoard`] is what the captain sees: every tile is hidden, water, or
//! a ship tile whose color is known once revealed.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cells::{CellSet, Color, Coord, MAX_CELLS, MAX_ROWS};

/// Joint proposals tried by [`sample_board`] before declaring the config infeasible.
pub const PRIOR_MAX_TRIES: usize = 1_000_000;
/// Default rejection budget for [`sample_board_consistent`].
pub const CONSISTENT_MAX_TRIES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoardError {
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
    #[error("infeasible config")]
    InfeasibleConfig,
    #[error("depleted: no consistent board found")]
    Depleted,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("coordinate {0} out of bounds")]
    OutOfBounds(Coord),
    #[error("unknown symbol {token:?} on line {line}")]
    UnknownSymbol { line: usize, token: String },
    #[error("ragged rows: line {line} has a different width")]
    RaggedRows { line: usize },
    #[error("empty board text")]
    Empty,
    #[error("{0} ship is not a straight contiguous line of length >= 2")]
    InvalidShip(Color),
    #[error("board violates config: {0}")]
    ConfigMismatch(&'static str),
    #[error("enumeration exceeds {0} boards")]
    EnumerationTooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShipSpec {
    pub color: Color,
    pub length: u8,
}

/// Game configuration: grid size, fleet and budgets.
///
/// With `shuffle_lengths` the configured lengths are a multiset dealt to the
/// colors by a uniformly random assignment on every board, so a ship's length
/// is only known once it is sunk (or asked about).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardConfig {
    pub rows: u8,
    pub cols: u8,
    pub ships: Vec<ShipSpec>,
    pub shuffle_lengths: bool,
    pub allow_touching: bool,
    pub question_budget: u32,
    pub move_budget: u32,
}

impl Default for BoardConfig {
    fn default() -> Self {
        BoardConfig {
            rows: 8,
            cols: 8,
            ships: [
                (Color::Red, 2),
                (Color::Green, 3),
                (Color::Purple, 4),
                (Color::Orange, 5),
            ]
            .into_iter()
            .map(|(color, length)| ShipSpec { color, length })
            .collect(),
            shuffle_lengths: true,
            allow_touching: true,
            question_budget: 15,
            move_budget: 40,
        }
    }
}

impl BoardConfig {
    /// A `rows`×`cols` config with fixed color/length pairs.
    pub fn fixed(rows: u8, cols: u8, ships: &[(Color, u8)]) -> Self {
        BoardConfig {
            rows,
            cols,
            ships: ships
                .iter()
                .map(|&(color, length)| ShipSpec { color, length })
                .collect(),
            shuffle_lengths: false,
            ..BoardConfig::default()
        }
    }

    pub fn cells(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    pub fn total_ship_cells(&self) -> usize {
        self.ships.iter().map(|s| s.length as usize).sum()
    }

    pub fn validate(&self) -> Result<(), BoardError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(BoardError::InvalidConfig(
                "board must have at least one row and column",
            ));
        }
        if self.rows > MAX_ROWS || self.cells() > MAX_CELLS {
            return Err(BoardError::InvalidConfig("board too large"));
        }
        if self.ships.is_empty() {
            return Err(BoardError::InvalidConfig("at least one ship required"));
        }
        if self.ships.iter().any(|s| s.length < 2) {
            return Err(BoardError::InvalidConfig("ship lengths must be >= 2"));
        }
        let colors: BTreeSet<Color> = self.ships.iter().map(|s| s.color).collect();
        if colors.len() != self.ships.len() {
            return Err(BoardError::InvalidConfig("ship colors must be distinct"));
        }
        if self.total_ship_cells() > self.cells() {
            return Err(BoardError::InvalidConfig("ships do not fit on the board"));
        }
        Ok(())
    }

    /// Distinct color-to-length assignments the prior ranges over, one length
    /// vector per assignment (indexed like `ships`).
    pub fn length_assignments(&self) -> Vec<Vec<u8>> {
        let base: Vec<u8> = self.ships.iter().map(|s| s.length).collect();
        if !self.shuffle_lengths {
            return alloc::vec![base];
        }
        let mut out = BTreeSet::new();
        permutations(
            &base,
            &mut Vec::new(),
            &mut alloc::vec![false; base.len()],
            &mut out,
        );
        out.into_iter().collect()
    }

    pub fn lengths_sorted(&self) -> Vec<u8> {
        let mut v: Vec<u8> = self.ships.iter().map(|s| s.length).collect();
        v.sort_unstable();
        v
    }
}

fn permutations(
    items: &[u8],
    cur: &mut Vec<u8>,
    used: &mut Vec<bool>,
    out: &mut BTreeSet<Vec<u8>>,
) {
    if cur.len() == items.len() {
        out.insert(cur.clone());
        return;
    }
    for i in 0..items.len() {
        if !used[i] {
            used[i] = true;
            cur.push(items[i]);
            permutations(items, cur, used, out);
            cur.pop();
            used[i] = false;
        }
    }
}

/// A straight ship segment anchored at its top-left cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Placement {
    pub origin: Coord,
    pub horizontal: bool,
    pub length: u8,
}

impl Placement {
    pub fn fits(&self, rows: u8, cols: u8) -> bool {
        let len = self.length as usize;
        if self.horizontal {
            self.origin.row < rows && self.origin.col as usize + len <= cols as usize
        } else {
            self.origin.col < cols && self.origin.row as usize + len <= rows as usize
        }
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.length).map(move |i| {
            if self.horizontal {
                Coord::new(self.origin.row, self.origin.col + i)
            } else {
                Coord::new(self.origin.row + i, self.origin.col)
            }
        })
    }

    pub fn cells(&self, cols: u8) -> CellSet {
        self.coords().map(|c| c.index(cols)).collect()
    }
}

/// Every in-bounds placement of a ship of `length`, horizontal first.
pub fn placements(rows: u8, cols: u8, length: u8) -> Vec<Placement> {
    let mut out = Vec::new();
    for horizontal in [true, false] {
        for row in 0..rows {
            for col in 0..cols {
                let p = Placement {
                    origin: Coord::new(row, col),
                    horizontal,
                    length,
                };
                if p.fits(rows, cols) {
                    out.push(p);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ship {
    pub color: Color,
    pub placement: Placement,
    pub cells: CellSet,
}

/// True value of a single tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Water,
    Ship(Color),
}

impl Cell {
    pub fn symbol(self) -> i8 {
        match self {
            Cell::Water => 0,
            Cell::Ship(c) => c.symbol(),
        }
    }

    pub fn is_ship(self) -> bool {
        matches!(self, Cell::Ship(_))
    }
}

/// Captain's view of a single tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Obs {
    Hidden,
    Water,
    Ship(Color),
}

impl Obs {
    pub fn symbol(self) -> i8 {
        match self {
            Obs::Hidden => -1,
            Obs::Water => 0,
            Obs::Ship(c) => c.symbol(),
        }
    }
}

impl From<Cell> for Obs {
    fn from(cell: Cell) -> Self {
        match cell {
            Cell::Water => Obs::Water,
            Cell::Ship(c) => Obs::Ship(c),
        }
    }
}

/// A complete hidden board. Ships are kept sorted by color.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Board {
    rows: u8,
    cols: u8,
    ships: Vec<Ship>,
    occupied: CellSet,
}

impl Board {
    /// Builds a board from placements, checking bounds, distinct colors and overlap.
    pub fn from_placements(
        rows: u8,
        cols: u8,
        placements: impl IntoIterator<Item = (Color, Placement)>,
    ) -> Result<Board, BoardError> {
        let mut ships: Vec<Ship> = Vec::new();
        let mut occupied = CellSet::EMPTY;
        for (color, placement) in placements {
            if placement.length < 2 || !placement.fits(rows, cols) {
                return Err(BoardError::InvalidShip(color));
            }
            if ships.iter().any(|s| s.color == color) {
                return Err(BoardError::ConfigMismatch("duplicate ship color"));
            }
            let cells = placement.cells(cols);
            if cells.intersects(&occupied) {
                return Err(BoardError::ConfigMismatch("ships overlap"));
            }
            occupied = occupied.union(&cells);
            ships.push(Ship {
                color,
                placement,
                cells,
            });
        }
        ships.sort_by_key(|s| s.color);
        Ok(Board {
            rows,
            cols,
            ships,
            occupied,
        })
    }

    pub fn all_water(rows: u8, cols: u8) -> Board {
        Board {
            rows,
            cols,
            ships: Vec::new(),
            occupied: CellSet::EMPTY,
        }
    }

    pub fn rows(&self) -> u8 {
        self.rows
    }

    pub fn cols(&self) -> u8 {
        self.cols
    }

    pub fn ships(&self) -> &[Ship] {
        &self.ships
    }

    pub fn ship(&self, color: Color) -> Option<&Ship> {
        self.ships.iter().find(|s| s.color == color)
    }

    /// All ship cells.
    pub fn occupied(&self) -> &CellSet {
        &self.occupied
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        if !self.occupied.contains(index) {
            return Cell::Water;
        }
        self.ships
            .iter()
            .find(|s| s.cells.contains(index))
            .map(|s| Cell::Ship(s.color))
            .unwrap_or(Cell::Water)
    }

    pub fn cell(&self, coord: Coord) -> Cell {
        self.cell_at(coord.index(self.cols))
    }

    /// Checks every board invariant against `config`.
    pub fn check(&self, config: &BoardConfig) -> Result<(), BoardError> {
        if self.rows != config.rows || self.cols != config.cols {
            return Err(BoardError::DimensionMismatch);
        }
        if self.ships.len() != config.ships.len() {
            return Err(BoardError::ConfigMismatch("wrong number of ships"));
        }
        let lengths: Vec<u8> = config
            .ships
            .iter()
            .map(|spec| {
                self.ship(spec.color)
                    .map(|s| s.placement.length)
                    .unwrap_or(0)
            })
            .collect();
        if !config.length_assignments().contains(&lengths) {
            return Err(BoardError::ConfigMismatch(
                "ship colors or lengths differ from config",
            ));
        }
        if !config.allow_touching {
            for (i, a) in self.ships.iter().enumerate() {
                let halo = a.cells.halo(self.rows, self.cols);
                if self.ships[i + 1..]
                    .iter()
                    .any(|b| b.cells.intersects(&halo))
                {
                    return Err(BoardError::ConfigMismatch("ships touch"));
                }
            }
        }
        Ok(())
    }

    /// Serializes as whitespace-separated symbol rows (`0` water, `1`..`4` ships).
    pub fn to_text(&self) -> String {
        grid_text(self.rows, self.cols, |i| self.cell_at(i).symbol())
    }

    /// Parses the board text format; ships are recovered from runs of equal symbols.
    pub fn parse(text: &str) -> Result<Board, BoardError> {
        let (rows, cols, symbols) = parse_grid(text)?;
        let mut per_color: [Vec<usize>; 4] = Default::default();
        for (i, &s) in symbols.iter().enumerate() {
            match s {
                0 => {}
                -1 => {
                    return Err(BoardError::UnknownSymbol {
                        line: i / cols as usize + 1,
                        token: "-1".into(),
                    })
                }
                s => per_color[Color::from_symbol(s).unwrap().index()].push(i),
            }
        }
        let mut ships = Vec::new();
        for color in Color::ALL {
            let cells = &per_color[color.index()];
            if cells.is_empty() {
                continue;
            }
            ships.push((color, line_placement(color, cells, cols)?));
        }
        Board::from_placements(rows, cols, ships)
    }
}

fn line_placement(color: Color, cells: &[usize], cols: u8) -> Result<Placement, BoardError> {
    let coords: Vec<Coord> = cells.iter().map(|&i| Coord::from_index(i, cols)).collect();
    let first = coords[0];
    let n = coords.len();
    if n < 2 {
        return Err(BoardError::InvalidShip(color));
    }
    let horizontal = coords.iter().all(|c| c.row == first.row);
    let vertical = coords.iter().all(|c| c.col == first.col);
    // cells arrive in row-major order, so a valid line is consecutive from `first`
    let contiguous = coords.iter().enumerate().all(|(k, c)| {
        if horizontal {
            c.col as usize == first.col as usize + k
        } else {
            c.row as usize == first.row as usize + k
        }
    });
    if !(horizontal || vertical) || !contiguous || n > u8::MAX as usize {
        return Err(BoardError::InvalidShip(color));
    }
    Ok(Placement {
        origin: first,
        horizontal,
        length: n as u8,
    })
}

fn grid_text(rows: u8, cols: u8, symbol: impl Fn(usize) -> i8) -> String {
    let mut out = String::new();
    for r in 0..rows as usize {
        if r > 0 {
            out.push('\n');
        }
        for c in 0..cols as usize {
            if c > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", symbol(r * cols as usize + c));
        }
    }
    out
}

fn parse_grid(text: &str) -> Result<(u8, u8, Vec<i8>), BoardError> {
    let mut symbols = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut n = 0;
        for token in line.split_whitespace() {
            let s: i8 = match token {
                "-1" | "0" | "1" | "2" | "3" | "4" => token.parse().unwrap(),
                _ => {
                    return Err(BoardError::UnknownSymbol {
                        line: line_no + 1,
                        token: token.into(),
                    })
                }
            };
            symbols.push(s);
            n += 1;
        }
        match width {
            None => width = Some(n),
            Some(w) if w != n => return Err(BoardError::RaggedRows { line: line_no + 1 }),
            _ => {}
        }
        rows += 1;
    }
    let cols = width.ok_or(BoardError::Empty)?;
    if rows > MAX_ROWS as usize || rows * cols > MAX_CELLS || cols > u8::MAX as usize {
        return Err(BoardError::InvalidConfig("board too large"));
    }
    Ok((rows as u8, cols as u8, symbols))
}

/// The captain's view: which tiles are revealed and what they showed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialBoard {
    rows: u8,
    cols: u8,
    revealed: CellSet,
    colors: [CellSet; 4],
    sunk: [bool; 4],
    tracks_sunk: bool,
}

impl PartialBoard {
    /// All-hidden view with sunk announcements tracked (none yet).
    pub fn hidden(rows: u8, cols: u8) -> PartialBoard {
        PartialBoard {
            rows,
            cols,
            revealed: CellSet::EMPTY,
            colors: [CellSet::EMPTY; 4],
            sunk: [false; 4],
            tracks_sunk: true,
        }
    }

    pub fn for_config(config: &BoardConfig) -> PartialBoard {
        PartialBoard::hidden(config.rows, config.cols)
    }

    /// View of `board` after shooting the given tiles (sunk ships announced).
    pub fn from_reveals(board: &Board, reveals: impl IntoIterator<Item = Coord>) -> PartialBoard {
        let mut p = PartialBoard::hidden(board.rows, board.cols);
        for c in reveals {
            p.set(c, board.cell(c).into());
        }
        for ship in &board.ships {
            if ship.cells.is_subset(&p.revealed) {
                p.mark_sunk(ship.color);
            }
        }
        p
    }

    /// Whether `color` has been announced sunk.
    pub fn is_sunk(&self, color: Color) -> bool {
        self.sunk[color.index()]
    }

    pub fn mark_sunk(&mut self, color: Color) {
        self.sunk[color.index()] = true;
    }

    /// When true, an unannounced ship is known not to be fully revealed.
    pub fn tracks_sunk(&self) -> bool {
        self.tracks_sunk
    }

    pub fn set_tracks_sunk(&mut self, tracks: bool) {
        self.tracks_sunk = tracks;
    }

    pub fn rows(&self) -> u8 {
        self.rows
    }

    pub fn cols(&self) -> u8 {
        self.cols
    }

    pub fn cells(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    pub fn get_at(&self, index: usize) -> Obs {
        if !self.revealed.contains(index) {
            return Obs::Hidden;
        }
        Color::ALL
            .into_iter()
            .find(|c| self.colors[c.index()].contains(index))
            .map(Obs::Ship)
            .unwrap_or(Obs::Water)
    }

    pub fn get(&self, coord: Coord) -> Obs {
        self.get_at(coord.index(self.cols))
    }

    pub fn set(&mut self, coord: Coord, obs: Obs) {
        let i = coord.index(self.cols);
        for set in &mut self.colors {
            set.remove(i);
        }
        match obs {
            Obs::Hidden => self.revealed.remove(i),
            Obs::Water => self.revealed.insert(i),
            Obs::Ship(c) => {
                self.revealed.insert(i);
                self.colors[c.index()].insert(i);
            }
        }
    }

    pub fn revealed(&self) -> &CellSet {
        &self.revealed
    }

    /// Revealed tiles of the given ship color.
    pub fn revealed_color(&self, color: Color) -> &CellSet {
        &self.colors[color.index()]
    }

    pub fn revealed_ships(&self) -> CellSet {
        self.colors
            .iter()
            .fold(CellSet::EMPTY, |acc, s| acc.union(s))
    }

    pub fn revealed_water(&self) -> CellSet {
        self.revealed.difference(&self.revealed_ships())
    }

    pub fn hidden_cells(&self) -> CellSet {
        CellSet::full(self.cells()).difference(&self.revealed)
    }

    pub fn hidden_count(&self) -> usize {
        self.cells() - self.revealed.len()
    }

    pub fn is_hidden(&self, coord: Coord) -> bool {
        !self.revealed.contains(coord.index(self.cols))
    }

    /// Grid symbols only (`-1` hidden), as shown to players.
    pub fn to_text(&self) -> String {
        grid_text(self.rows, self.cols, |i| self.get_at(i).symbol())
    }

    /// Grid plus a `sunk:` tracker line when sunk announcements are tracked.
    pub fn to_text_with_tracker(&self) -> String {
        let mut out = self.to_text();
        if self.tracks_sunk {
            out.push_str("\nsunk:");
            let mut any = false;
            for c in Color::ALL.into_iter().filter(|c| self.is_sunk(*c)) {
                out.push(' ');
                out.push_str(c.name());
                any = true;
            }
            if !any {
                out.push_str(" -");
            }
        }
        out
    }

    /// Parses grid text with an optional trailing `sunk: red green` (or `sunk: -`)
    /// line; without it sunk status is untracked.
    pub fn parse(text: &str) -> Result<PartialBoard, BoardError> {
        let mut grid = String::new();
        let mut tracker = None;
        for (line_no, line) in text.lines().enumerate() {
            if let Some(rest) = line.trim().strip_prefix("sunk:") {
                let mut flags = [false; 4];
                for name in rest
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                {
                    if name == "-" {
                        continue;
                    }
                    let color: Color = name.parse().map_err(|_| BoardError::UnknownSymbol {
                        line: line_no + 1,
                        token: name.into(),
                    })?;
                    flags[color.index()] = true;
                }
                tracker = Some(flags);
            } else {
                grid.push_str(line);
                grid.push('\n');
            }
        }
        let (rows, cols, symbols) = parse_grid(&grid)?;
        let mut p = PartialBoard::hidden(rows, cols);
        match tracker {
            Some(flags) => p.sunk = flags,
            None => p.tracks_sunk = false,
        }
        for (i, s) in symbols.into_iter().enumerate() {
            let obs = match s {
                -1 => Obs::Hidden,
                0 => Obs::Water,
                s => Obs::Ship(Color::from_symbol(s).unwrap()),
            };
            p.set(Coord::from_index(i, cols), obs);
        }
        Ok(p)
    }
}

/// Whether every revealed tile of `partial` agrees with `board`.
pub fn is_consistent(board: &Board, partial: &PartialBoard) -> Result<bool, BoardError> {
    if board.rows != partial.rows || board.cols != partial.cols {
        return Err(BoardError::DimensionMismatch);
    }
    Ok(consistent_unchecked(board, partial))
}

pub(crate) fn consistent_unchecked(board: &Board, partial: &PartialBoard) -> bool {
    if partial.revealed_water().intersects(&board.occupied) {
        return false;
    }
    for color in Color::ALL {
        let seen = partial.revealed_color(color);
        if seen.is_empty() {
            continue;
        }
        match board.ship(color) {
            Some(ship) if seen.is_subset(&ship.cells) => {}
            _ => return false,
        }
    }
    for ship in &board.ships {
        let complete = ship.cells.is_subset(&partial.revealed);
        if partial.is_sunk(ship.color) {
            if !complete {
                return false;
            }
        } else if partial.tracks_sunk && complete {
            return false;
        }
    }
    // announced ships must exist
    Color::ALL
        .into_iter()
        .all(|c| !partial.is_sunk(c) || board.ship(c).is_some())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reveal {
    pub partial: PartialBoard,
    pub hit: bool,
    pub sunk: Option<Color>,
}

/// Shoots `target`, returning the updated view, whether it hit, and the ship sunk by this shot.
pub fn reveal(board: &Board, partial: &PartialBoard, target: Coord) -> Result<Reveal, BoardError> {
    if board.rows != partial.rows || board.cols != partial.cols {
        return Err(BoardError::DimensionMismatch);
    }
    if !target.in_bounds(board.rows, board.cols) {
        return Err(BoardError::OutOfBounds(target));
    }
    let cell = board.cell(target);
    let fresh = partial.is_hidden(target);
    let mut next = partial.clone();
    next.set(target, cell.into());
    let sunk = match cell {
        Cell::Ship(color) if fresh => {
            let ship = board.ship(color).expect("ship cell without ship");
            ship.cells.is_subset(&next.revealed).then_some(color)
        }
        _ => None,
    };
    if let Some(color) = sunk {
        next.mark_sunk(color);
    }
    Ok(Reveal {
        partial: next,
        hit: cell.is_ship(),
        sunk,
    })
}

struct Candidate {
    placement: Placement,
    cells: CellSet,
    halo: CellSet,
}

struct Assignment {
    weight: f64,
    per_ship: Vec<Vec<Candidate>>,
}

/// Exact uniform sampler over boards consistent with a partial view.
///
/// Each ship's placements are pruned to those compatible with the view on
/// their own (no revealed water, no other color's revealed tiles, covering all
/// of its own color's revealed tiles). A length assignment is drawn with
/// probability proportional to the product of its per-ship candidate counts,
/// each ship then uniformly among its candidates, and the joint draw is
/// rejected on overlap (or touching). Every consistent board therefore has
/// the same acceptance probability.
pub struct ConsistentSampler {
    rows: u8,
    cols: u8,
    colors: Vec<Color>,
    allow_touching: bool,
    assignments: Vec<Assignment>,
    total_weight: f64,
}

impl ConsistentSampler {
    pub fn new(config: &BoardConfig, partial: &PartialBoard) -> Result<Self, BoardError> {
        config.validate()?;
        if partial.rows != config.rows || partial.cols != config.cols {
            return Err(BoardError::DimensionMismatch);
        }
        let water = partial.revealed_water();
        let ship_tiles = partial.revealed_ships();
        let colors: Vec<Color> = config.ships.iter().map(|s| s.color).collect();
        // tiles of colors outside the fleet make every board inconsistent
        let fleet_tiles = colors.iter().fold(CellSet::EMPTY, |acc, c| {
            acc.union(partial.revealed_color(*c))
        });
        let mut assignments = Vec::new();
        let mut total_weight = 0.0;
        let announced_in_fleet = Color::ALL
            .into_iter()
            .all(|c| !partial.is_sunk(c) || colors.contains(&c));
        if fleet_tiles == ship_tiles && announced_in_fleet {
            for lengths in config.length_assignments() {
                let mut per_ship = Vec::with_capacity(colors.len());
                let mut weight = 1.0;
                for (&color, &length) in colors.iter().zip(&lengths) {
                    let own = partial.revealed_color(color);
                    let others = ship_tiles.difference(own);
                    let sunk = partial.is_sunk(color);
                    let revealed = partial.revealed();
                    let cands: Vec<Candidate> = placements(config.rows, config.cols, length)
                        .into_iter()
                        .filter_map(|placement| {
                            let cells = placement.cells(config.cols);
                            let complete = cells.is_subset(revealed);
                            let ok = !cells.intersects(&water)
                                && !cells.intersects(&others)
                                && own.is_subset(&cells)
                                && (complete || !sunk)
                                && (!complete || sunk || !partial.tracks_sunk);
                            ok.then(|| Candidate {
                                placement,
                                cells,
                                halo: cells.halo(config.rows, config.cols),
                            })
                        })
                        .collect();
                    weight *= cands.len() as f64;
                    per_ship.push(cands);
                }
                if weight > 0.0 {
                    total_weight += weight;
                    assignments.push(Assignment { weight, per_ship });
                }
            }
        }
        Ok(ConsistentSampler {
            rows: config.rows,
            cols: config.cols,
            colors,
            allow_touching: config.allow_touching,
            assignments,
            total_weight,
        })
    }

    /// False when no single-ship-compatible assignment exists at all.
    pub fn has_support(&self) -> bool {
        !self.assignments.is_empty()
    }

    /// One uniform draw, or `None` after `max_tries` rejected joint proposals.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, max_tries: usize) -> Option<Board> {
        if self.assignments.is_empty() {
            return None;
        }
        let mut chosen: Vec<&Candidate> = Vec::with_capacity(self.colors.len());
        'outer: for _ in 0..max_tries {
            let mut u = rng.gen::<f64>() * self.total_weight;
            let mut assignment = self.assignments.last().unwrap();
            for a in &self.assignments {
                if u < a.weight {
                    assignment = a;
                    break;
                }
                u -= a.weight;
            }
            chosen.clear();
            let mut occupied = CellSet::EMPTY;
            let mut halo = CellSet::EMPTY;
            for cands in &assignment.per_ship {
                let c = &cands[rng.gen_range(0..cands.len())];
                if c.cells.intersects(&occupied)
                    || (!self.allow_touching && c.cells.intersects(&halo))
                {
                    continue 'outer;
                }
                occupied = occupied.union(&c.cells);
                halo = halo.union(&c.halo);
                chosen.push(c);
            }
            let mut ships: Vec<Ship> = self
                .colors
                .iter()
                .zip(&chosen)
                .map(|(&color, c)| Ship {
                    color,
                    placement: c.placement,
                    cells: c.cells,
                })
                .collect();
            ships.sort_by_key(|s| s.color);
            return Some(Board {
                rows: self.rows,
                cols: self.cols,
                ships,
                occupied,
            });
        }
        None
    }

    /// All consistent boards, or an error once more than `limit` are found.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<Board>, BoardError> {
        let mut out = Vec::new();
        let mut stack: Vec<&Candidate> = Vec::new();
        for a in &self.assignments {
            self.enumerate_rec(
                a,
                &mut stack,
                CellSet::EMPTY,
                CellSet::EMPTY,
                &mut out,
                limit,
            )?;
        }
        Ok(out)
    }

    fn enumerate_rec<'a>(
        &self,
        assignment: &'a Assignment,
        stack: &mut Vec<&'a Candidate>,
        occupied: CellSet,
        halo: CellSet,
        out: &mut Vec<Board>,
        limit: usize,
    ) -> Result<(), BoardError> {
        let depth = stack.len();
        if depth == assignment.per_ship.len() {
            if out.len() >= limit {
                return Err(BoardError::EnumerationTooLarge(limit));
            }
            let mut ships: Vec<Ship> = self
                .colors
                .iter()
                .zip(stack.iter())
                .map(|(&color, c)| Ship {
                    color,
                    placement: c.placement,
                    cells: c.cells,
                })
                .collect();
            ships.sort_by_key(|s| s.color);
            out.push(Board {
                rows: self.rows,
                cols: self.cols,
                ships,
                occupied,
            });
            return Ok(());
        }
        for c in &assignment.per_ship[depth] {
            if c.cells.intersects(&occupied) || (!self.allow_touching && c.cells.intersects(&halo))
            {
                continue;
            }
            stack.push(c);
            self.enumerate_rec(
                assignment,
                stack,
                occupied.union(&c.cells),
                halo.union(&c.halo),
                out,
                limit,
            )?;
            stack.pop();
        }
        Ok(())
    }
}

/// Draws a board uniformly from the prior over valid boards.
pub fn sample_board<R: Rng + ?Sized>(
    config: &BoardConfig,
    rng: &mut R,
) -> Result<Board, BoardError> {
    let sampler = ConsistentSampler::new(config, &PartialBoard::for_config(config))?;
    sampler
        .draw(rng, PRIOR_MAX_TRIES)
        .ok_or(BoardError::InfeasibleConfig)
}

/// Draws a board uniformly among those consistent with `partial`.
pub fn sample_board_consistent<R: Rng + ?Sized>(
    config: &BoardConfig,
    partial: &PartialBoard,
    rng: &mut R,
    max_tries: usize,
) -> Result<Board, BoardError> {
    let sampler = ConsistentSampler::new(config, partial)?;
    sampler.draw(rng, max_tries).ok_or(BoardError::Depleted)
}

/// Every valid board consistent with `partial` (feasible set), guarded by `limit`.
pub fn enumerate_boards(
    config: &BoardConfig,
    partial: &PartialBoard,
    limit: usize,
) -> Result<Vec<Board>, BoardError> {
    ConsistentSampler::new(config, partial)?.enumerate(limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> BoardConfig {
        BoardConfig::fixed(4, 4, &[(Color::Red, 2), (Color::Green, 3)])
    }

    #[test]
    fn default_config_is_valid() {
        let c = BoardConfig::default();
        c.validate().unwrap();
        assert_eq!(c.total_ship_cells(), 14);
        assert_eq!(c.length_assignments().len(), 24);
    }

    #[test]
    fn invalid_configs() {
        let mut c = BoardConfig::default();
        c.ships[0].length = 1;
        assert!(c.validate().is_err());
        let mut c = BoardConfig::default();
        c.ships[1].color = Color::Red;
        assert!(c.validate().is_err());
        let c = BoardConfig::fixed(
            2,
            2,
            &[(Color::Red, 2), (Color::Green, 2), (Color::Purple, 2)],
        );
        assert!(c.validate().is_err());
    }

    #[test]
    fn sample_is_deterministic_and_valid() {
        let config = BoardConfig::default();
        let a = sample_board(&config, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = sample_board(&config, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        a.check(&config).unwrap();
    }

    #[test]
    fn infeasible_no_touch_config() {
        // two length-2 ships on a 2x2 board must touch
        let mut config = BoardConfig::fixed(2, 2, &[(Color::Red, 2), (Color::Green, 2)]);
        config.allow_touching = false;
        let err = sample_board(&config, &mut ChaCha8Rng::seed_from_u64(1)).unwrap_err();
        assert_eq!(err, BoardError::InfeasibleConfig);
    }

    #[test]
    fn two_by_two_single_ship_is_uniform() {
        let config = BoardConfig::fixed(2, 2, &[(Color::Red, 2)]);
        let sampler = ConsistentSampler::new(&config, &PartialBoard::for_config(&config)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let all = placements(2, 2, 2);
        assert_eq!(all.len(), 4);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            let b = sampler.draw(&mut rng, 10).unwrap();
            let p = b.ship(Color::Red).unwrap().placement;
            counts[all.iter().position(|q| *q == p).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn consistency_rules() {
        let config = small();
        let board = sample_board(&config, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let hidden = PartialBoard::for_config(&config);
        assert!(is_consistent(&board, &hidden).unwrap());
        let ship_cell = board.occupied().iter().next().unwrap();
        let mut p = hidden.clone();
        p.set(Coord::from_index(ship_cell, 4), Obs::Water);
        assert!(!is_consistent(&board, &p).unwrap());
        let wrong = PartialBoard::hidden(3, 4);
        assert_eq!(
            is_consistent(&board, &wrong),
            Err(BoardError::DimensionMismatch)
        );
    }

    #[test]
    fn reveal_water_hit_and_sink() {
        let board = Board::from_placements(
            2,
            3,
            [(
                Color::Red,
                Placement {
                    origin: Coord::new(0, 0),
                    horizontal: true,
                    length: 2,
                },
            )],
        )
        .unwrap();
        let p = PartialBoard::hidden(2, 3);
        let r = reveal(&board, &p, Coord::new(1, 2)).unwrap();
        assert!(!r.hit && r.sunk.is_none());
        assert_eq!(r.partial.get(Coord::new(1, 2)), Obs::Water);
        let r = reveal(&board, &r.partial, Coord::new(0, 0)).unwrap();
        assert!(r.hit && r.sunk.is_none());
        let r2 = reveal(&board, &r.partial, Coord::new(0, 1)).unwrap();
        assert_eq!(r2.sunk, Some(Color::Red));
        // re-revealing is a no-op
        let again = reveal(&board, &r2.partial, Coord::new(0, 1)).unwrap();
        assert!(again.hit && again.sunk.is_none());
        assert_eq!(again.partial, r2.partial);
        assert_eq!(
            reveal(&board, &p, Coord::new(2, 0)).unwrap_err(),
            BoardError::OutOfBounds(Coord::new(2, 0))
        );
    }

    #[test]
    fn forty_reveals_leave_twenty_four_hidden() {
        let config = BoardConfig::default();
        let board = sample_board(&config, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let mut p = PartialBoard::for_config(&config);
        for i in 0..40 {
            p = reveal(&board, &p, Coord::from_index(i, 8)).unwrap().partial;
        }
        assert_eq!(p.hidden_count(), 24);
    }

    #[test]
    fn codec_examples() {
        assert_eq!(Board::all_water(2, 2).to_text(), "0 0\n0 0");
        let config = BoardConfig::default();
        let board = sample_board(&config, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let mut p = PartialBoard::from_reveals(&board, [Coord::new(3, 3)]);
        assert!(p.to_text().starts_with("-1 "));
        assert_eq!(PartialBoard::parse(&p.to_text_with_tracker()).unwrap(), p);
        assert!(!PartialBoard::parse(&p.to_text()).unwrap().tracks_sunk());
        p.set(Coord::new(3, 3), Obs::Hidden);
        assert_eq!(p, PartialBoard::for_config(&config));
        assert!(matches!(
            Board::parse("0 5\n0 0"),
            Err(BoardError::UnknownSymbol { .. })
        ));
        assert!(matches!(
            Board::parse("0 0\n0"),
            Err(BoardError::RaggedRows { line: 2 })
        ));
        assert!(matches!(
            Board::parse("1 0\n0 1"),
            Err(BoardError::InvalidShip(Color::Red))
        ));
    }

    #[test]
    fn revealed_full_ship_is_respected() {
        let config = BoardConfig::default();
        let truth = sample_board(&config, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
        let red = truth.ship(Color::Red).unwrap().clone();
        let p = PartialBoard::from_reveals(&truth, red.placement.coords());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let b = sample_board_consistent(&config, &p, &mut rng, CONSISTENT_MAX_TRIES).unwrap();
            assert_eq!(b.ship(Color::Red).unwrap().cells, red.cells);
        }
    }
}
