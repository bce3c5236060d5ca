//! On-disk formats: JSONL trajectories, `.board` files, saved belief states
//! and metrics tables.
//!
//! A trajectory file holds one JSON object per line: a `header` line (the
//! engine header plus the producing [`RunConfig`]), one line per event, and a
//! closing `result` line carrying the game metrics.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use infoseek_core::belief::LoggedAnswer;
use infoseek_core::engine::{Event, GameResult, TrajectoryHeader};
use infoseek_core::guesswho::{GuessEvent, GuessResult, GuessTrajectory, GuessTrajectoryHeader};
use infoseek_core::metrics::{GameMetrics, PolicySummary};
use infoseek_core::{Board, BoardConfig, Color, ParticleBelief, PartialBoard, Question, Trajectory};

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Syntax { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io { path: path.into(), source }
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum Frame<H, R> {
    Header {
        #[serde(flatten)]
        header: H,
        run: RunConfig,
    },
    Result {
        #[serde(flatten)]
        result: R,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metrics: Option<GameMetrics>,
    },
}

/// A trajectory with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedGame {
    pub run: RunConfig,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordedGuessGame {
    pub run: RunConfig,
    pub trajectory: GuessTrajectory,
}

fn json_line<T: Serialize>(out: &mut String, value: &T) {
    // Serializing these plain data types cannot fail.
    out.push_str(&serde_json::to_string(value).expect("serializable"));
    out.push('\n');
}

pub fn trajectory_to_jsonl(run: &RunConfig, traj: &Trajectory) -> String {
    let mut out = String::new();
    json_line(&mut out, &Frame::<_, GameResult>::Header { header: &traj.header, run: run.clone() });
    for e in &traj.events {
        json_line(&mut out, e);
    }
    json_line(
        &mut out,
        &Frame::<TrajectoryHeader, _>::Result { result: &traj.result, metrics: Some(GameMetrics::of(traj)) },
    );
    out
}

pub fn guess_trajectory_to_jsonl(run: &RunConfig, traj: &GuessTrajectory) -> String {
    let mut out = String::new();
    json_line(&mut out, &Frame::<_, GuessResult>::Header { header: &traj.header, run: run.clone() });
    for e in &traj.events {
        json_line(&mut out, e);
    }
    json_line(&mut out, &Frame::<GuessTrajectoryHeader, _>::Result { result: &traj.result, metrics: None });
    out
}

/// Header, events and result of a JSONL file; `Ev` is the event type.
fn parse_jsonl<H, Ev, R>(path: &Path, text: &str) -> Result<(H, RunConfig, Vec<Ev>, R), FormatError>
where
    H: for<'de> Deserialize<'de>,
    Ev: for<'de> Deserialize<'de>,
    R: for<'de> Deserialize<'de>,
{
    let syntax = |line: usize, msg: String| FormatError::Syntax { path: path.into(), line, msg };
    let mut header = None;
    let mut events = Vec::new();
    let mut result = None;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let n = i + 1;
        if result.is_some() {
            return Err(syntax(n, "content after the result line".into()));
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| syntax(n, e.to_string()))?;
        let kind = value.get("type").and_then(|t| t.as_str()).unwrap_or("");
        match kind {
            "header" | "result" => {
                let frame: Frame<H, R> = serde_json::from_value(value).map_err(|e| syntax(n, e.to_string()))?;
                match frame {
                    Frame::Header { header: h, run } => {
                        if header.is_some() {
                            return Err(syntax(n, "second header line".into()));
                        }
                        header = Some((h, run));
                    }
                    Frame::Result { result: r, .. } => result = Some(r),
                }
            }
            _ => {
                if header.is_none() {
                    return Err(syntax(n, "event before the header line".into()));
                }
                events.push(serde_json::from_value(value).map_err(|e| syntax(n, e.to_string()))?);
            }
        }
    }
    let (h, run) = header.ok_or_else(|| syntax(1, "missing header line".into()))?;
    let r = result.ok_or_else(|| syntax(text.lines().count(), "missing result line".into()))?;
    Ok((h, run, events, r))
}

pub fn parse_trajectory(path: &Path, text: &str) -> Result<RecordedGame, FormatError> {
    let (header, run, events, result) = parse_jsonl::<TrajectoryHeader, Event, GameResult>(path, text)?;
    Ok(RecordedGame { run, trajectory: Trajectory { header, events, result } })
}

pub fn parse_guess_trajectory(path: &Path, text: &str) -> Result<RecordedGuessGame, FormatError> {
    let (header, run, events, result) = parse_jsonl::<GuessTrajectoryHeader, GuessEvent, GuessResult>(path, text)?;
    Ok(RecordedGuessGame { run, trajectory: GuessTrajectory { header, events, result } })
}

pub fn read_trajectory(path: &Path) -> Result<RecordedGame, FormatError> {
    parse_trajectory(path, &read_text(path)?)
}

pub fn read_guess_trajectory(path: &Path) -> Result<RecordedGuessGame, FormatError> {
    parse_guess_trajectory(path, &read_text(path)?)
}

/// Only the run configuration from a trajectory header (either environment).
pub fn read_run_config(path: &Path) -> Result<RunConfig, FormatError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&first)
        .map_err(|e| FormatError::Syntax { path: path.into(), line: 1, msg: e.to_string() })?;
    if value.get("type").and_then(|t| t.as_str()) != Some("header") {
        return Err(FormatError::Syntax { path: path.into(), line: 1, msg: "not a header line".into() });
    }
    let run = value.get("run").cloned().unwrap_or_default();
    serde_json::from_value(run).map_err(|e| FormatError::Syntax { path: path.into(), line: 1, msg: e.to_string() })
}

/// Environment tag of a trajectory file.
pub fn trajectory_env(path: &Path) -> Result<String, FormatError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&first)
        .map_err(|e| FormatError::Syntax { path: path.into(), line: 1, msg: e.to_string() })?;
    Ok(value.get("env").and_then(|v| v.as_str()).unwrap_or("battleship").to_string())
}

pub fn read_board(path: &Path) -> Result<Board, FormatError> {
    Board::parse(&read_text(path)?).map_err(|e| FormatError::Invalid(format!("{}: {e}", path.display())))
}

pub fn write_board(path: &Path, board: &Board) -> Result<(), FormatError> {
    write_text(path, &(board.to_text() + "\n"))
}

/// `.board` files in `dir`, sorted by name.
pub fn board_files(dir: &Path) -> Result<Vec<PathBuf>, FormatError> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "board"))
        .collect();
    out.sort();
    Ok(out)
}

/// The configuration a loaded board was drawn from: the default game when
/// grid and fleet lengths match it, otherwise a fixed fleet as found.
pub fn config_for_board(board: &Board) -> BoardConfig {
    let default = BoardConfig::default();
    let mut lengths: Vec<u8> = board.ships().iter().map(|s| s.placement.length).collect();
    lengths.sort_unstable();
    let colors: Vec<Color> = board.ships().iter().map(|s| s.color).collect();
    let default_colors: Vec<Color> = default.ships.iter().map(|s| s.color).collect();
    if board.rows() == default.rows
        && board.cols() == default.cols
        && lengths == default.lengths_sorted()
        && colors == default_colors
    {
        return default;
    }
    let ships: Vec<(Color, u8)> = board.ships().iter().map(|s| (s.color, s.placement.length)).collect();
    BoardConfig::fixed(board.rows(), board.cols(), &ships)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedAnswer {
    pub question: String,
    pub answer: bool,
    /// Captain's view when the question was asked; the current view if absent.
    #[serde(default)]
    pub view: Option<String>,
}

/// A captain's information state, enough to rebuild a particle belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavedState {
    #[serde(default)]
    pub config: BoardConfig,
    /// Partial-board text, optionally with a `sunk:` line.
    pub partial: String,
    #[serde(default)]
    pub answers: Vec<SavedAnswer>,
    pub epsilon: f64,
    pub particles: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SavedState {
    pub fn read(path: &Path) -> Result<Self, FormatError> {
        serde_json::from_str(&read_text(path)?).map_err(|e| FormatError::Syntax {
            path: path.into(),
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn partial_board(&self) -> Result<PartialBoard, FormatError> {
        PartialBoard::parse(&self.partial).map_err(|e| FormatError::Invalid(format!("partial board: {e}")))
    }

    /// Particles consistent with the reveals, weighted by every answer.
    pub fn belief(&self) -> Result<(ParticleBelief, PartialBoard), FormatError> {
        let partial = self.partial_board()?;
        let bad = |e: &dyn std::fmt::Display| FormatError::Invalid(e.to_string());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut belief =
            ParticleBelief::init(&self.config, &partial, self.particles, self.epsilon, &mut rng).map_err(|e| bad(&e))?;
        for a in &self.answers {
            let logged = self.logged(a, &partial)?;
            belief.update_answer(&logged.question, logged.answer, &logged.view, &mut rng).map_err(|e| bad(&e))?;
        }
        Ok((belief, partial))
    }

    fn logged(&self, a: &SavedAnswer, current: &PartialBoard) -> Result<LoggedAnswer, FormatError> {
        let question = Question::parse(&a.question, self.config.rows, self.config.cols)
            .map_err(|e| FormatError::Invalid(format!("'{}': {e}", a.question)))?;
        let view = match &a.view {
            Some(t) => PartialBoard::parse(t).map_err(|e| FormatError::Invalid(format!("answer view: {e}")))?,
            None => current.clone(),
        };
        Ok(LoggedAnswer { question, answer: a.answer, view })
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Per-game CSV, one row per game, columns named after [`GameMetrics`] fields.
pub fn metrics_csv(games: &[GameMetrics]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record([
        "board_id",
        "policy",
        "precision",
        "recall",
        "f1",
        "moves_used",
        "questions_used",
        "mean_eig",
        "redundant_fraction",
        "outcome",
        "shadow_scored",
    ]);
    for g in games {
        let outcome = serde_json::to_value(g.outcome).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = w.write_record([
            g.board_id.clone(),
            g.policy.clone(),
            g.precision.to_string(),
            g.recall.to_string(),
            g.f1.to_string(),
            g.moves_used.to_string(),
            g.questions_used.to_string(),
            opt(g.mean_eig),
            opt(g.redundant_fraction),
            outcome,
            g.shadow_scored.to_string(),
        ]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

/// One row per policy.
pub fn summary_csv(rows: &[PolicySummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record([
        "policy",
        "games",
        "precision",
        "recall",
        "f1",
        "moves",
        "questions",
        "win_fraction",
        "mean_eig",
        "redundant_fraction",
        "errors",
        "shadow_scored",
    ]);
    for r in rows {
        let _ = w.write_record([
            r.policy.clone(),
            r.games.to_string(),
            r.precision.to_string(),
            r.recall.to_string(),
            r.f1.to_string(),
            r.moves.to_string(),
            r.questions.to_string(),
            r.win_fraction.to_string(),
            opt(r.mean_eig),
            opt(r.redundant_fraction),
            r.errors.to_string(),
            r.shadow_scored.to_string(),
        ]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

/// Square matrix: cell (row A, column B) is win_rate(A, B); empty where the
/// two policies share no board.
pub fn win_rate_csv(policies: &[String], matrix: &[Vec<Option<f64>>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec!["policy".to_string()];
    head.extend(policies.iter().cloned());
    let _ = w.write_record(&head);
    for (p, row) in policies.iter().zip(matrix) {
        let mut rec = vec![p.clone()];
        rec.extend(row.iter().map(|v| opt(*v)));
        let _ = w.write_record(&rec);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub games: Vec<GameMetrics>,
    pub summary: Vec<PolicySummary>,
    pub policies: Vec<String>,
    pub win_rates: Vec<Vec<Option<f64>>>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| FormatError::Invalid(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

/// Fixed-width table for terminal output.
pub fn summary_table(rows: &[PolicySummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>5} {:>9} {:>7} {:>6} {:>6} {:>9} {:>8}",
        "policy", "games", "precision", "recall", "f1", "moves", "questions", "mean_eig"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<10} {:>5} {:>9.3} {:>7.3} {:>6.3} {:>6.2} {:>9.2} {:>8}",
            r.policy,
            r.games,
            r.precision,
            r.recall,
            r.f1,
            r.moves,
            r.questions,
            r.mean_eig.map(|e| format!("{e:.3}")).unwrap_or_else(|| "-".into())
        );
    }
    out
}

/// Writes `text` to stdout, ignoring a closed pipe.
pub fn print(text: &str) {
    let _ = std::io::stdout().write_all(text.as_bytes());
}

#[cfg(test)]
mod tests {
    use super::*;
    use infoseek_core::engine::{run_game, GameSeeds, GameSetup, RunOptions};
    use infoseek_core::{CaptainPolicy, SpotterChannel};

    fn game(policy: &str, seed: u64) -> Trajectory {
        let config = BoardConfig::default();
        let p = CaptainPolicy::preset(policy).unwrap();
        let seeds = GameSeeds::from_seed(seed);
        let truth = infoseek_core::engine::sample_truth(&config, seeds.board).unwrap();
        let setup = GameSetup {
            config: &config,
            truth,
            board_id: "b".into(),
            policy: &p,
            seeds,
            options: RunOptions { particles: 200, ..Default::default() },
        };
        run_game(setup, &mut SpotterChannel::noisy(0.1).unwrap(), None).unwrap()
    }

    #[test]
    fn trajectory_round_trips() {
        let traj = game("bayes-qmd", 3);
        let run = RunConfig::default();
        let text = trajectory_to_jsonl(&run, &traj);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["type"], "header");
        assert_eq!(first["env"], "battleship");
        let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
        assert_eq!(last["type"], "result");
        assert!(last["metrics"]["f1"].is_number());

        let back = parse_trajectory(Path::new("t.jsonl"), &text).unwrap();
        assert_eq!(back.run, run);
        assert_eq!(back.trajectory.events.len(), traj.events.len());
        assert_eq!(trajectory_to_jsonl(&back.run, &back.trajectory), text);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let traj = game("random", 1);
        let text = trajectory_to_jsonl(&RunConfig::default(), &traj);
        let p = Path::new("t.jsonl");
        let no_result: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(parse_trajectory(p, &no_result).is_err());
        let no_header: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(parse_trajectory(p, &no_header).is_err());
        assert!(parse_trajectory(p, "{not json\n").is_err());
    }

    #[test]
    fn default_boards_keep_the_default_config() {
        let config = BoardConfig::default();
        let b = infoseek_core::engine::sample_truth(&config, 9).unwrap();
        let back = Board::parse(&b.to_text()).unwrap();
        assert_eq!(config_for_board(&back), config);
        let small = BoardConfig::fixed(4, 4, &[(Color::Red, 2), (Color::Green, 3)]);
        let b = infoseek_core::engine::sample_truth(&small, 9).unwrap();
        assert_eq!(config_for_board(&b), small);
    }

    #[test]
    fn csv_columns_follow_metrics_fields() {
        let m = GameMetrics::of(&game("greedy", 2));
        let csv = metrics_csv(&[m.clone()]);
        let header = csv.lines().next().unwrap();
        let value = serde_json::to_value(&m).unwrap();
        let fields: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
        let mut cols: Vec<&str> = header.split(',').collect();
        cols.sort_unstable();
        let mut fields_sorted = fields.clone();
        fields_sorted.sort_unstable();
        assert_eq!(cols, fields_sorted);
    }

    #[test]
    fn saved_state_rebuilds_a_belief() {
        let state = SavedState {
            config: BoardConfig::default(),
            partial: PartialBoard::for_config(&BoardConfig::default()).to_text(),
            answers: vec![SavedAnswer { question: "(any-ship (row A))".into(), answer: false, view: None }],
            epsilon: 0.0,
            particles: 300,
            seed: 1,
        };
        let (belief, partial) = state.belief().unwrap();
        let q = Question::parse("(any-ship (row A))", 8, 8).unwrap();
        assert!(belief.yes_probability(&q, &partial) < 1e-12);
    }
}
