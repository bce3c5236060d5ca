#![allow(dead_code)]

use std::collections::HashMap;

use infoseek_core::board::reveal;
use infoseek_core::{Atom, Board, BoardConfig, Cmp, Color, Coord, PartialBoard, Placement, Question, Region};
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// 4×4 board with a red 2-ship and a green 3-ship.
pub fn small_config() -> BoardConfig {
    BoardConfig::fixed(4, 4, &[(Color::Red, 2), (Color::Green, 3)])
}

/// Every valid board of `small_config`, built from nested placement loops
/// independently of the library's sampler.
pub fn brute_force_small() -> Vec<Board> {
    let mut out = Vec::new();
    let all = |len: u8| {
        let mut v = Vec::new();
        for horizontal in [true, false] {
            for r in 0..4u8 {
                for c in 0..4u8 {
                    let (er, ec) = if horizontal { (r, c + len - 1) } else { (r + len - 1, c) };
                    if er < 4 && ec < 4 {
                        v.push(Placement { origin: Coord::new(r, c), horizontal, length: len });
                    }
                }
            }
        }
        v
    };
    for red in all(2) {
        for green in all(3) {
            let rc: Vec<Coord> = red.coords().collect();
            if green.coords().any(|g| rc.contains(&g)) {
                continue;
            }
            out.push(Board::from_placements(4, 4, [(Color::Red, red), (Color::Green, green)]).unwrap());
        }
    }
    out
}

/// Upper critical value of χ² with `df` degrees of freedom at level `alpha`.
pub fn chi2_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}

/// Pearson statistic of `counts` against equal expected frequencies over `support`.
pub fn chi2_uniform<K: std::hash::Hash + Eq>(counts: &HashMap<K, usize>, support: &[K], total: usize) -> f64 {
    let expected = total as f64 / support.len() as f64;
    support
        .iter()
        .map(|k| {
            let o = *counts.get(k).unwrap_or(&0) as f64;
            (o - expected).powi(2) / expected
        })
        .sum()
}

/// Total variation between two hit grids after normalizing each to a distribution over tiles.
pub fn grid_tv(a: &[f64], b: &[f64]) -> f64 {
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if sa == 0.0 && sb == 0.0 {
        return 0.0;
    }
    0.5 * a.iter().zip(b).map(|(x, y)| (x / sa - y / sb).abs()).sum::<f64>()
}

pub fn random_coord<R: Rng>(rng: &mut R, rows: u8, cols: u8) -> Coord {
    Coord::new(rng.gen_range(0..rows), rng.gen_range(0..cols))
}

pub fn random_color<R: Rng>(rng: &mut R) -> Color {
    *[Color::Red, Color::Green, Color::Purple, Color::Orange].choose(rng).unwrap()
}

pub fn random_cmp<R: Rng>(rng: &mut R) -> Cmp {
    *[Cmp::Eq, Cmp::Lt, Cmp::Gt, Cmp::Le, Cmp::Ge].choose(rng).unwrap()
}

pub fn random_region<R: Rng>(rng: &mut R, rows: u8, cols: u8) -> Region {
    match rng.gen_range(0..4) {
        0 => Region::Rect(random_coord(rng, rows, cols), random_coord(rng, rows, cols)),
        1 => Region::Row(rng.gen_range(0..rows)),
        2 => Region::Col(rng.gen_range(0..cols)),
        _ => {
            let n = rng.gen_range(1..5);
            Region::Tiles((0..n).map(|_| random_coord(rng, rows, cols)).collect())
        }
    }
}

pub fn random_atom<R: Rng>(rng: &mut R, rows: u8, cols: u8) -> Atom {
    match rng.gen_range(0..9) {
        0 => Atom::TileShip(random_coord(rng, rows, cols)),
        1 => Atom::TileColor(random_coord(rng, rows, cols), random_color(rng)),
        2 => Atom::AnyShip(random_region(rng, rows, cols)),
        3 => Atom::CountShip(random_region(rng, rows, cols), random_cmp(rng), rng.gen_range(0..6)),
        4 => Atom::ShipLength(random_color(rng), random_cmp(rng), rng.gen_range(1..6)),
        5 => Atom::ShipHorizontal(random_color(rng)),
        6 => Atom::ShipsTouching(random_color(rng), random_color(rng)),
        7 => Atom::AnyUnrevealedShip(random_region(rng, rows, cols)),
        _ => Atom::ShipSunk(random_color(rng)),
    }
}

/// Random question of depth ≤ `depth`.
pub fn random_question<R: Rng>(rng: &mut R, rows: u8, cols: u8, depth: u32) -> Question {
    if depth == 0 || rng.gen_bool(0.4) {
        return Question::Atom(random_atom(rng, rows, cols));
    }
    match rng.gen_range(0..3) {
        0 => Question::not(random_question(rng, rows, cols, depth - 1)),
        1 => Question::And((0..rng.gen_range(2..4)).map(|_| random_question(rng, rows, cols, depth - 1)).collect()),
        _ => Question::Or((0..rng.gen_range(2..4)).map(|_| random_question(rng, rows, cols, depth - 1)).collect()),
    }
}

/// `truth` with `k` random distinct tiles revealed through the game's reveal rule.
pub fn random_view<R: Rng>(rng: &mut R, truth: &Board, k: usize) -> PartialBoard {
    let (rows, cols) = (truth.rows(), truth.cols());
    let mut idx: Vec<usize> = (0..rows as usize * cols as usize).collect();
    idx.shuffle(rng);
    let mut p = PartialBoard::hidden(rows, cols);
    for &i in idx.iter().take(k) {
        p = reveal(truth, &p, Coord::from_index(i, cols)).unwrap().partial;
    }
    p
}
