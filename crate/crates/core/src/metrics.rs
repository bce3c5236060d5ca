//! Evaluation metrics: targeting precision/recall/F1, question EIG statistics
//! and board-matched win rates.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::engine::{Outcome, Trajectory};

/// Questions with EIG below this many bits count as redundant.
pub const REDUNDANT_EIG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetingScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when no shot was fired and precision is reported as 0.
    pub precision_undefined: bool,
}

/// Scores from raw counts.
pub fn targeting_from_counts(hits: u32, shots: u32, ship_cells: u32) -> TargetingScores {
    let precision = if shots > 0 {
        hits as f64 / shots as f64
    } else {
        0.0
    };
    let recall = if ship_cells > 0 {
        hits as f64 / ship_cells as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    TargetingScores {
        precision,
        recall,
        f1,
        precision_undefined: shots == 0,
    }
}

/// The board as a binary classification task with ship tiles positive.
pub fn targeting_scores(traj: &Trajectory) -> TargetingScores {
    let (mut hits, mut shots) = (0, 0);
    for (_, hit) in traj.shots() {
        shots += 1;
        hits += hit as u32;
    }
    targeting_from_counts(hits, shots, traj.result.ship_cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigStats {
    pub mean_eig: f64,
    pub redundant_fraction: f64,
    pub scored: u32,
}

/// Mean EIG and redundant fraction over asked questions that were scored;
/// `None` when there are none.
pub fn eig_stats(traj: &Trajectory) -> Option<EigStats> {
    eig_stats_of(traj.question_eigs().flatten())
}

pub fn eig_stats_of(eigs: impl IntoIterator<Item = f64>) -> Option<EigStats> {
    let (mut n, mut sum, mut redundant) = (0u32, 0.0, 0u32);
    for e in eigs {
        n += 1;
        sum += e;
        redundant += (e < REDUNDANT_EIG) as u32;
    }
    (n > 0).then(|| EigStats {
        mean_eig: sum / n as f64,
        redundant_fraction: redundant as f64 / n as f64,
        scored: n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameMetrics {
    pub board_id: String,
    pub policy: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub moves_used: u32,
    pub questions_used: u32,
    pub mean_eig: Option<f64>,
    pub redundant_fraction: Option<f64>,
    pub outcome: Outcome,
    /// Question EIGs come from a passive belief rather than the captain's own.
    pub shadow_scored: bool,
}

impl GameMetrics {
    pub fn of(traj: &Trajectory) -> Self {
        let t = targeting_scores(traj);
        let e = eig_stats(traj);
        GameMetrics {
            board_id: traj.header.board_id.clone(),
            policy: traj.header.policy.name.clone(),
            precision: t.precision,
            recall: t.recall,
            f1: t.f1,
            moves_used: traj.result.moves_used,
            questions_used: traj.result.questions_used,
            mean_eig: e.map(|e| e.mean_eig),
            redundant_fraction: e.map(|e| e.redundant_fraction),
            outcome: traj.result.outcome,
            shadow_scored: traj.header.shadow_scored,
        }
    }

    pub fn sank_all(&self) -> bool {
        self.outcome == Outcome::Win
    }
}

/// Credit for A in one board-matched pair: fewer moves to sink all ships wins,
/// otherwise higher F1; exact ties split.
pub fn pair_credit(a: &GameMetrics, b: &GameMetrics) -> f64 {
    let key = |m: &GameMetrics| (m.sank_all(), m.moves_used, m.f1);
    let ((sa, ma, fa), (sb, mb, fb)) = (key(a), key(b));
    match (sa, sb) {
        (true, false) => 1.0,
        (false, true) => 0.0,
        (true, true) if ma != mb => (ma < mb) as u8 as f64,
        _ if fa > fb => 1.0,
        _ if fa < fb => 0.0,
        _ => 0.5,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("the two trajectory sets share no board")]
pub struct NoOverlap;

fn by_board(xs: &[GameMetrics]) -> BTreeMap<&str, Vec<&GameMetrics>> {
    let mut m: BTreeMap<&str, Vec<&GameMetrics>> = BTreeMap::new();
    for x in xs {
        m.entry(x.board_id.as_str()).or_default().push(x);
    }
    m
}

/// Mean credit of A over all board-matched pairs, averaged within each board
/// and then across boards.
pub fn win_rate(a: &[GameMetrics], b: &[GameMetrics]) -> Result<f64, NoOverlap> {
    let (ga, gb) = (by_board(a), by_board(b));
    let mut total = 0.0;
    let mut boards = 0;
    for (id, xs) in &ga {
        let Some(ys) = gb.get(id) else { continue };
        let mut s = 0.0;
        for x in xs {
            for y in ys {
                s += pair_credit(x, y);
            }
        }
        total += s / (xs.len() * ys.len()) as f64;
        boards += 1;
    }
    if boards == 0 {
        return Err(NoOverlap);
    }
    Ok(total / boards as f64)
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    pub games: u32,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub moves: f64,
    pub questions: f64,
    pub win_fraction: f64,
    /// Mean over games that asked at least one scored question.
    pub mean_eig: Option<f64>,
    pub redundant_fraction: Option<f64>,
    pub errors: u32,
    pub shadow_scored: bool,
}

pub fn summarize(policy: &str, games: &[GameMetrics]) -> PolicySummary {
    let n = games.len().max(1) as f64;
    let mean = |f: &dyn Fn(&GameMetrics) -> f64| games.iter().map(f).sum::<f64>() / n;
    let opt_mean = |f: &dyn Fn(&GameMetrics) -> Option<f64>| {
        let v: Vec<f64> = games.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    PolicySummary {
        policy: policy.into(),
        games: games.len() as u32,
        precision: mean(&|g| g.precision),
        recall: mean(&|g| g.recall),
        f1: mean(&|g| g.f1),
        moves: mean(&|g| g.moves_used as f64),
        questions: mean(&|g| g.questions_used as f64),
        win_fraction: mean(&|g| g.sank_all() as u8 as f64),
        mean_eig: opt_mean(&|g| g.mean_eig),
        redundant_fraction: opt_mean(&|g| g.redundant_fraction),
        errors: games.iter().filter(|g| g.outcome == Outcome::Error).count() as u32,
        shadow_scored: games.iter().any(|g| g.shadow_scored),
    }
}
