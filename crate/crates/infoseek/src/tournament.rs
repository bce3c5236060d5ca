//! Policy × board × seed grids. Every policy sees the same boards and the same
//! per-game seeds, so results are board-matched.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use infoseek_core::engine::Outcome;
use infoseek_core::metrics::{summarize, win_rate, GameMetrics, PolicySummary};
use infoseek_core::Trajectory;

use crate::config::{derive_seed, RunConfig, TournamentConfig};
use crate::formats::{self, MetricsReport};
use crate::runner::{self, RunError, Session};

/// One cell of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GameJob {
    pub policy: usize,
    pub board: usize,
    pub seed: usize,
    pub run: RunConfig,
}

/// Jobs in policy-major, then board, then seed order.
pub fn plan(cfg: &TournamentConfig) -> Result<Vec<GameJob>, RunError> {
    cfg.validate()?;
    let files: Option<Vec<PathBuf>> = match &cfg.board_dir {
        Some(dir) => {
            let f = formats::board_files(dir)?;
            if f.is_empty() {
                return Err(RunError::Usage(format!("no .board files in {}", dir.display())));
            }
            Some(f)
        }
        None => None,
    };
    let boards = files.as_ref().map_or(cfg.boards, Vec::len);
    let mut jobs = Vec::with_capacity(cfg.policies.len() * boards * cfg.seeds);
    for (pi, policy) in cfg.policies.iter().enumerate() {
        for b in 0..boards {
            for s in 0..cfg.seeds {
                let mut run = RunConfig { policy: policy.clone(), ..cfg.run.clone() };
                run.seed = derive_seed(cfg.base_seed, &[b as u64, s as u64 + 1]);
                match &files {
                    Some(f) => run.board_file = Some(f[b].clone()),
                    None => run.board_seed = Some(derive_seed(cfg.base_seed, &[b as u64])),
                }
                jobs.push(GameJob { policy: pi, board: b, seed: s, run });
            }
        }
    }
    Ok(jobs)
}

pub struct TournamentResult {
    pub jobs: Vec<GameJob>,
    pub trajectories: Vec<Trajectory>,
    pub report: MetricsReport,
}

impl TournamentResult {
    pub fn error_count(&self) -> usize {
        self.trajectories.iter().filter(|t| t.result.outcome == Outcome::Error).count()
    }
}

/// Runs the grid on a pool of `cfg.workers` threads; results come back in
/// plan order regardless of scheduling.
pub fn run(cfg: &TournamentConfig) -> Result<TournamentResult, RunError> {
    let jobs = plan(cfg)?;
    let session = Session::new(&cfg.run);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::Runtime(e.to_string()))?;
    let trajectories: Vec<Trajectory> = pool.install(|| {
        jobs.par_iter()
            .map(|job| runner::play_battleship(&job.run, &session, None))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let report = report(&cfg.policies, &trajectories);
    Ok(TournamentResult { jobs, trajectories, report })
}

pub fn report(policies: &[String], trajectories: &[Trajectory]) -> MetricsReport {
    let games: Vec<GameMetrics> = trajectories.iter().map(GameMetrics::of).collect();
    let by_policy: Vec<Vec<GameMetrics>> =
        policies.iter().map(|p| games.iter().filter(|g| &g.policy == p).cloned().collect()).collect();
    let summary: Vec<PolicySummary> = policies.iter().zip(&by_policy).map(|(p, g)| summarize(p, g)).collect();
    let win_rates = by_policy
        .iter()
        .map(|a| by_policy.iter().map(|b| win_rate(a, b).ok()).collect())
        .collect();
    MetricsReport { games, summary, policies: policies.to_vec(), win_rates }
}

pub fn trajectory_file_name(job: &GameJob, traj: &Trajectory) -> String {
    format!("{}__{}__s{}.jsonl", job.run.policy, traj.header.board_id, job.seed)
}

/// Writes trajectories and metrics tables under `out`; returns the
/// trajectory paths in plan order.
pub fn write_outputs(result: &TournamentResult, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let dir = out.join("trajectories");
    let mut paths = Vec::with_capacity(result.jobs.len());
    for (job, traj) in result.jobs.iter().zip(&result.trajectories) {
        let path = dir.join(trajectory_file_name(job, traj));
        formats::write_text(&path, &formats::trajectory_to_jsonl(&job.run, traj))?;
        paths.push(path);
    }
    let r = &result.report;
    formats::write_text(&out.join("metrics.csv"), &formats::metrics_csv(&r.games))?;
    formats::write_text(&out.join("summary.csv"), &formats::summary_csv(&r.summary))?;
    formats::write_text(&out.join("win_rates.csv"), &formats::win_rate_csv(&r.policies, &r.win_rates))?;
    formats::write_json(&out.join("metrics.json"), r)?;
    Ok(paths)
}
