//! Grid primitives: coordinates, ship colors and a fixed-capacity cell bitset.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Largest number of cells a board may have (the capacity of [`CellSet`]).
pub const MAX_CELLS: usize = 256;
/// Rows are labelled with single letters.
pub const MAX_ROWS: u8 = 26;

/// Ship colors, numbered as in the board text format (1 = Red ... 4 = Orange).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Purple,
    Orange,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Green, Color::Purple, Color::Orange];

    pub fn symbol(self) -> i8 {
        self.index() as i8 + 1
    }

    pub fn from_symbol(symbol: i8) -> Option<Color> {
        match symbol {
            1..=4 => Some(Color::ALL[symbol as usize - 1]),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Purple => "purple",
            Color::Orange => "orange",
        }
    }

    /// Capitalized name, as used in prompts ("Red ship").
    pub fn title(self) -> &'static str {
        match self {
            Color::Red => "Red",
            Color::Green => "Green",
            Color::Purple => "Purple",
            Color::Orange => "Orange",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

/// A tile position, 0-indexed. Displays as `A1` (row letter, 1-based column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub row: u8,
    pub col: u8,
}

impl Coord {
    pub const fn new(row: u8, col: u8) -> Self {
        Coord { row, col }
    }

    pub fn index(self, cols: u8) -> usize {
        self.row as usize * cols as usize + self.col as usize
    }

    pub fn from_index(index: usize, cols: u8) -> Self {
        Coord {
            row: (index / cols as usize) as u8,
            col: (index % cols as usize) as u8,
        }
    }

    pub fn in_bounds(self, rows: u8, cols: u8) -> bool {
        self.row < rows && self.col < cols
    }

    pub fn row_letter(row: u8) -> char {
        (b'A' + row) as char
    }

    /// Parses `E7`-style coordinates (case-insensitive). Bounds are not checked.
    pub fn parse(s: &str) -> Option<Coord> {
        let s = s.trim();
        let mut chars = s.chars();
        let letter = chars.next()?.to_ascii_uppercase();
        if !letter.is_ascii_uppercase() {
            return None;
        }
        let digits = chars.as_str();
        if digits.is_empty() || digits.len() > 3 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let col: u32 = digits.parse().ok()?;
        if col == 0 || col > 255 {
            return None;
        }
        Some(Coord {
            row: letter as u8 - b'A',
            col: (col - 1) as u8,
        })
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", Coord::row_letter(self.row), self.col as u32 + 1)
    }
}

impl Serialize for Coord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::string::String as Deserialize>::deserialize(deserializer)?;
        Coord::parse(&s).ok_or_else(|| serde::de::Error::custom("invalid coordinate"))
    }
}

/// Set of cell indices in `0..MAX_CELLS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CellSet([u64; 4]);

impl CellSet {
    pub const EMPTY: CellSet = CellSet([0; 4]);

    pub fn full(len: usize) -> CellSet {
        let mut set = CellSet::EMPTY;
        for i in 0..len {
            set.insert(i);
        }
        set
    }

    #[inline]
    pub fn insert(&mut self, index: usize) {
        self.0[index >> 6] |= 1 << (index & 63);
    }

    #[inline]
    pub fn remove(&mut self, index: usize) {
        self.0[index >> 6] &= !(1 << (index & 63));
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        self.0[index >> 6] >> (index & 63) & 1 == 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0 == [0; 4]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn union(&self, other: &CellSet) -> CellSet {
        CellSet(core::array::from_fn(|i| self.0[i] | other.0[i]))
    }

    #[inline]
    pub fn intersection(&self, other: &CellSet) -> CellSet {
        CellSet(core::array::from_fn(|i| self.0[i] & other.0[i]))
    }

    #[inline]
    pub fn difference(&self, other: &CellSet) -> CellSet {
        CellSet(core::array::from_fn(|i| self.0[i] & !other.0[i]))
    }

    #[inline]
    pub fn intersects(&self, other: &CellSet) -> bool {
        (0..4).any(|i| self.0[i] & other.0[i] != 0)
    }

    #[inline]
    pub fn is_subset(&self, other: &CellSet) -> bool {
        (0..4).all(|i| self.0[i] & !other.0[i] == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            core::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }

    /// Cells edge-adjacent to the set (excluding the set itself) on a `rows`×`cols` grid.
    pub fn halo(&self, rows: u8, cols: u8) -> CellSet {
        let mut out = CellSet::EMPTY;
        for idx in self.iter() {
            let c = Coord::from_index(idx, cols);
            if c.row > 0 {
                out.insert(Coord::new(c.row - 1, c.col).index(cols));
            }
            if c.row + 1 < rows {
                out.insert(Coord::new(c.row + 1, c.col).index(cols));
            }
            if c.col > 0 {
                out.insert(Coord::new(c.row, c.col - 1).index(cols));
            }
            if c.col + 1 < cols {
                out.insert(Coord::new(c.row, c.col + 1).index(cols));
            }
        }
        out.difference(self)
    }
}

impl FromIterator<usize> for CellSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = CellSet::EMPTY;
        for i in iter {
            set.insert(i);
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn coord_round_trip() {
        let c = Coord::parse("e7").unwrap();
        assert_eq!(c, Coord::new(4, 6));
        assert_eq!(alloc::format!("{c}"), "E7");
        assert!(Coord::parse("7E").is_none());
        assert!(Coord::parse("A0").is_none());
        assert!(Coord::parse("A").is_none());
    }

    #[test]
    fn cellset_ops() {
        let a: CellSet = [0, 5, 64, 200].into_iter().collect();
        assert_eq!(a.len(), 4);
        assert_eq!(a.iter().collect::<Vec<_>>(), [0, 5, 64, 200]);
        let b: CellSet = [5, 7].into_iter().collect();
        assert!(a.intersects(&b));
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), [5]);
        assert!(!a.is_subset(&b));
    }

    #[test]
    fn halo_of_corner_cell() {
        let a: CellSet = [0].into_iter().collect();
        let h = a.halo(8, 8);
        assert_eq!(h.iter().collect::<Vec<_>>(), [1, 8]);
    }

    #[test]
    fn color_symbols() {
        for c in Color::ALL {
            assert_eq!(Color::from_symbol(c.symbol()), Some(c));
            assert_eq!(c.name().parse::<Color>(), Ok(c));
        }
        assert_eq!("RED".parse::<Color>(), Ok(Color::Red));
    }
}
