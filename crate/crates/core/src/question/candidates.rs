use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;

use super::{answer_vector, AnswerVector, Atom, Cmp, Question, Region};
use crate::board::{Board, BoardConfig, PartialBoard};
use crate::cells::Coord;

/// Base atoms for the symbolic question generator; depth-2 `and`/`or`
/// combinations of pairs are addressed virtually by index.
#[derive(Debug, Clone)]
pub struct TemplatePool {
    base: Vec<Question>,
}

impl TemplatePool {
    pub fn new(partial: &PartialBoard, config: &BoardConfig) -> Self {
        let (rows, cols) = (config.rows, config.cols);
        let mut base: Vec<Question> = Vec::new();
        let mut push = |a: Atom| base.push(Question::Atom(a));
        for r in 0..rows {
            push(Atom::AnyShip(Region::Row(r)));
            push(Atom::AnyUnrevealedShip(Region::Row(r)));
        }
        for c in 0..cols {
            push(Atom::AnyShip(Region::Col(c)));
            push(Atom::AnyUnrevealedShip(Region::Col(c)));
        }
        let (hr, hc) = (rows.div_ceil(2), cols.div_ceil(2));
        if rows >= 2 && cols >= 2 {
            let quadrants = [
                (Coord::new(0, 0), Coord::new(hr - 1, hc - 1)),
                (Coord::new(0, hc), Coord::new(hr - 1, cols - 1)),
                (Coord::new(hr, 0), Coord::new(rows - 1, hc - 1)),
                (Coord::new(hr, hc), Coord::new(rows - 1, cols - 1)),
            ];
            for (a, b) in quadrants {
                push(Atom::AnyShip(Region::Rect(a, b)));
                for k in [2, 3, 4] {
                    push(Atom::CountShip(Region::Rect(a, b), Cmp::Ge, k));
                }
            }
        }
        let mut lengths = config.lengths_sorted();
        lengths.dedup();
        let colors: Vec<_> = config.ships.iter().map(|s| s.color).collect();
        for &color in &colors {
            push(Atom::ShipHorizontal(color));
            push(Atom::ShipSunk(color));
            for &len in &lengths {
                push(Atom::ShipLength(color, Cmp::Eq, len as u32));
            }
            for &len in lengths.iter().skip(1) {
                push(Atom::ShipLength(color, Cmp::Ge, len as u32));
            }
        }
        for (i, &a) in colors.iter().enumerate() {
            for &b in &colors[i + 1..] {
                push(Atom::ShipsTouching(a, b));
            }
        }
        for idx in partial.hidden_cells().iter() {
            push(Atom::TileShip(Coord::from_index(idx, cols)));
        }
        TemplatePool {
            base: base.into_iter().map(|q| q.canonical()).collect(),
        }
    }

    pub fn base(&self) -> &[Question] {
        &self.base
    }

    fn pair_count(&self) -> usize {
        let n = self.base.len();
        n * n.saturating_sub(1) / 2
    }

    /// Number of addressable depth-2 combinations (`and` and `or` of each pair).
    pub fn combination_count(&self) -> usize {
        2 * self.pair_count()
    }

    /// Combination `index` in `0..combination_count()`.
    pub fn combination(&self, index: usize) -> Question {
        let pairs = self.pair_count();
        let (is_or, mut t) = (index >= pairs, index % pairs);
        let n = self.base.len();
        let mut i = 0;
        while t >= n - 1 - i {
            t -= n - 1 - i;
            i += 1;
        }
        let j = i + 1 + t;
        let (a, b) = (self.base[i].clone(), self.base[j].clone());
        let q = if is_or {
            Question::or(a, b)
        } else {
            Question::and(a, b)
        };
        q.canonical()
    }
}

/// Output of the candidate generator.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub questions: Vec<Question>,
    /// Answer vectors over the particles, aligned with `questions`.
    pub vectors: Vec<AnswerVector>,
    /// Every candidate is already determined under the current particles.
    pub eig_null: bool,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }
}

/// Samples up to `k` informative questions without replacement from the
/// template pool (single atoms and depth-2 combinations, each tier picked
/// with equal probability).
///
/// Candidates whose answers over the live particles (positive weight, or all
/// particles when `weights` is `None`) duplicate an earlier candidate's, or
/// are constant, are skipped. If no informative candidate turns up, up to `k`
/// constant ones are returned with `eig_null` set.
pub fn enumerate_candidates<R: Rng + ?Sized>(
    partial: &PartialBoard,
    config: &BoardConfig,
    k: usize,
    particles: &[Board],
    weights: Option<&[f64]>,
    rng: &mut R,
) -> CandidateSet {
    let pool = TemplatePool::new(partial, config);
    let live = AnswerVector::from_bits(match weights {
        Some(w) => w.iter().map(|&w| w > 0.0).collect::<Vec<_>>(),
        None => alloc::vec![true; particles.len()],
    });
    let live_count = live.count_ones();

    let mut base_order: Vec<usize> = (0..pool.base.len()).collect();
    let mut base_next = 0;
    let combos = pool.combination_count();
    let mut used_combos = BTreeSet::new();

    let mut seen = BTreeSet::new();
    let mut out = CandidateSet {
        questions: Vec::new(),
        vectors: Vec::new(),
        eig_null: false,
    };
    let mut constants: Vec<(Question, AnswerVector)> = Vec::new();
    let max_attempts = (30 * k).max(200);

    for _ in 0..max_attempts {
        if out.questions.len() >= k {
            break;
        }
        let base_left = base_next < base_order.len();
        let combo_left = used_combos.len() < combos;
        let q = match (base_left, combo_left) {
            (false, false) => break,
            (true, c) if !c || rng.gen_bool(0.5) => {
                let pick = rng.gen_range(base_next..base_order.len());
                base_order.swap(base_next, pick);
                base_next += 1;
                pool.base[base_order[base_next - 1]].clone()
            }
            _ => {
                let mut idx = rng.gen_range(0..combos);
                while !used_combos.insert(idx) {
                    idx = rng.gen_range(0..combos);
                }
                pool.combination(idx)
            }
        };
        let v = answer_vector(&q, particles, partial);
        let key = v.masked(&live);
        let ones = key.count_ones();
        if ones == 0 || ones == live_count {
            if constants.len() < k {
                constants.push((q, v));
            }
            continue;
        }
        if seen.insert(key) {
            out.questions.push(q);
            out.vectors.push(v);
        }
    }
    if out.questions.is_empty() {
        out.eig_null = true;
        for (q, v) in constants {
            out.questions.push(q);
            out.vectors.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::sample_board;
    use crate::cells::Color;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn combination_indexing_covers_all_pairs() {
        let config = BoardConfig::fixed(3, 3, &[(Color::Red, 2)]);
        let pool = TemplatePool::new(&PartialBoard::for_config(&config), &config);
        let n = pool.base().len();
        let all: BTreeSet<_> = (0..pool.combination_count())
            .map(|i| pool.combination(i))
            .collect();
        assert_eq!(pool.combination_count(), n * (n - 1));
        // distinct indices give distinct questions (pairs of distinct canonical atoms)
        assert_eq!(all.len(), n * (n - 1));
    }

    #[test]
    fn fresh_board_candidates_are_distinct_and_informative() {
        let config = BoardConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let particles: Vec<_> = (0..300)
            .map(|_| sample_board(&config, &mut rng).unwrap())
            .collect();
        let partial = PartialBoard::for_config(&config);
        let set = enumerate_candidates(&partial, &config, 10, &particles, None, &mut rng);
        assert_eq!(set.len(), 10);
        assert!(!set.eig_null);
        let keys: BTreeSet<_> = set.vectors.iter().cloned().collect();
        assert_eq!(keys.len(), 10);
        for v in &set.vectors {
            let ones = v.count_ones();
            assert!(ones > 0 && ones < 300);
        }
        let one = enumerate_candidates(&partial, &config, 1, &particles, None, &mut rng);
        assert_eq!(one.len(), 1);
        assert!(one.questions[0].in_bounds(8, 8));
    }

    #[test]
    fn deterministic_under_seed() {
        let config = BoardConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let particles: Vec<_> = (0..50)
            .map(|_| sample_board(&config, &mut rng).unwrap())
            .collect();
        let partial = PartialBoard::for_config(&config);
        let a = enumerate_candidates(
            &partial,
            &config,
            5,
            &particles,
            None,
            &mut ChaCha8Rng::seed_from_u64(9),
        );
        let b = enumerate_candidates(
            &partial,
            &config,
            5,
            &particles,
            None,
            &mut ChaCha8Rng::seed_from_u64(9),
        );
        assert_eq!(a.questions, b.questions);
    }

    #[test]
    fn fully_revealed_board_yields_eig_null() {
        let config = BoardConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let truth = sample_board(&config, &mut rng).unwrap();
        let partial = PartialBoard::from_reveals(&truth, (0..64).map(|i| Coord::from_index(i, 8)));
        let set = enumerate_candidates(
            &partial,
            &config,
            3,
            &[truth.clone(), truth],
            None,
            &mut rng,
        );
        assert!(set.eig_null);
        assert!(!set.is_empty() && set.len() <= 3);
    }

    #[test]
    fn identical_answer_vectors_are_deduplicated() {
        // one particle: every question is constant, so duplicates collapse into the null set
        let config = BoardConfig::fixed(2, 2, &[(Color::Red, 2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b1 = sample_board(&config, &mut rng).unwrap();
        let b2 = loop {
            let b = sample_board(&config, &mut rng).unwrap();
            if b != b1 {
                break b;
            }
        };
        let partial = PartialBoard::for_config(&config);
        let set = enumerate_candidates(&partial, &config, 50, &[b1, b2], None, &mut rng);
        // with two particles only the patterns 01 and 10 are informative
        assert!(set.len() <= 2);
        let keys: BTreeSet<_> = set.vectors.iter().cloned().collect();
        assert_eq!(keys.len(), set.len());
    }
}
