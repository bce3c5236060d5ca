//! Command-line interface.

use std::fmt::Write as _;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use infoseek_core::belief::max_eig;
use infoseek_core::engine::{sample_truth, Event, Outcome};
use infoseek_core::guesswho::GuessEvent;
use infoseek_core::metrics::GameMetrics;
use infoseek_core::{BoardConfig, Question, Trajectory};

use crate::config::{derive_seed, AgentKind, Env, RunConfig, SourceKind, SpotterKind, TournamentConfig};
use crate::formats::{self, SavedState};
use crate::interactive::TerminalCaptain;
use crate::runner::{self, RunError, Session};
use crate::tournament;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const PRECEDENCE: &str = "Settings are resolved as: command-line flags, then the --config TOML file, then built-in defaults. \
The API key is read from the environment variable named by endpoint.api_key_env (INFOSEEK_API_KEY by default). \
Exit status: 0 success, 1 user error, 2 runtime error or a game that ended in error.";

#[derive(Parser, Debug)]
#[command(name = "infoseek", version, about = "Bayesian question-asking agents for Battleship and Guess Who", after_help = PRECEDENCE)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample hidden boards and write them as .board files.
    SampleBoards(SampleArgs),
    /// Play one Battleship game and write its trajectory.
    Play(PlayArgs),
    /// Run a policy × board × seed grid.
    Tournament(TournamentArgs),
    /// Print a trajectory turn by turn.
    Replay(ReplayArgs),
    /// Score a question against a saved belief state.
    Eig(EigArgs),
    /// Play Guess Who games.
    Guesswho(GuessArgs),
}

/// Overrides for a single game's settings.
#[derive(Args, Debug, Default, Clone)]
pub struct RunArgs {
    /// TOML file with run settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Policy preset (random, greedy, lm, bayes-q, bayes-m, bayes-qm, bayes-qmd).
    #[arg(long)]
    pub policy: Option<String>,
    /// Lookahead discount in [0, 1].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Candidate questions per selection.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub source: Option<SourceKind>,
    /// Particle count.
    #[arg(long)]
    pub particles: Option<usize>,
    /// The captain's assumed answer noise.
    #[arg(long)]
    pub belief_epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub spotter: Option<SpotterKind>,
    /// Flip rate of the noisy spotter.
    #[arg(long)]
    pub channel_epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub board_seed: Option<u64>,
    /// Play on this .board file.
    #[arg(long)]
    pub board: Option<PathBuf>,
    #[arg(long)]
    pub question_budget: Option<u32>,
    #[arg(long)]
    pub move_budget: Option<u32>,
    /// Who drives lm-style hooks.
    #[arg(long, value_enum)]
    pub captain: Option<AgentKind>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub base_url: Option<String>,
    /// Replay model calls from a cassette file.
    #[arg(long)]
    pub cassette: Option<PathBuf>,
    #[arg(long)]
    pub chain_of_thought: bool,
    /// Record the hit grid before every action.
    #[arg(long)]
    pub snapshots: bool,
}

impl RunArgs {
    /// `base` with every given flag applied.
    pub fn apply(&self, mut run: RunConfig) -> RunConfig {
        macro_rules! set {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = &self.$field { run.$target = v.clone(); })*
            };
        }
        set!(policy => policy, source => source, particles => particles, belief_epsilon => belief_epsilon,
             spotter => spotter, channel_epsilon => channel_epsilon, seed => seed, captain => captain);
        if self.gamma.is_some() {
            run.gamma = self.gamma;
        }
        if self.k.is_some() {
            run.k = self.k;
        }
        if self.board_seed.is_some() {
            run.board_seed = self.board_seed;
        }
        if self.board.is_some() {
            run.board_file = self.board.clone();
        }
        if self.question_budget.is_some() {
            run.question_budget = self.question_budget;
        }
        if self.move_budget.is_some() {
            run.move_budget = self.move_budget;
        }
        if let Some(m) = &self.model {
            run.endpoint.model = m.clone();
        }
        if let Some(u) = &self.base_url {
            run.endpoint.base_url = u.clone();
        }
        if self.cassette.is_some() {
            run.cassette = self.cassette.clone();
        }
        run.chain_of_thought |= self.chain_of_thought;
        run.snapshots |= self.snapshots;
        run
    }

    pub fn resolve(&self) -> Result<RunConfig, RunError> {
        Ok(self.apply(RunConfig::load(self.config.as_deref())?))
    }
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 18)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "boards")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlayArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Re-run the configuration stored in a trajectory header.
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// Type questions and shots at the terminal.
    #[arg(long)]
    pub interactive: bool,
    /// Trajectory output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TournamentArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated policy presets.
    #[arg(long, value_delimiter = ',')]
    pub policies: Option<Vec<String>>,
    /// Number of sampled boards.
    #[arg(long)]
    pub boards: Option<usize>,
    /// Use the .board files in this directory instead of sampling.
    #[arg(long)]
    pub board_dir: Option<PathBuf>,
    /// Seeds per board.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "tournament")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    pub trajectory: PathBuf,
    /// Print hit-probability grids where recorded.
    #[arg(long)]
    pub snapshots: bool,
}

#[derive(Args, Debug)]
pub struct EigArgs {
    /// Saved state JSON.
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub question: String,
}

#[derive(Args, Debug)]
pub struct GuessArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Roster JSON file, or `100` / `classic` for a bundled roster.
    #[arg(long)]
    pub roster: Option<PathBuf>,
    /// Target name.
    #[arg(long)]
    pub target: Option<String>,
    /// Question budget.
    #[arg(long)]
    pub budget: Option<u32>,
    /// Number of games, seeded from --seed upward.
    #[arg(long, default_value_t = 1)]
    pub games: usize,
    /// Directory for trajectories.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                EXIT_USER
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, RunError> {
    match cmd {
        Command::SampleBoards(a) => sample_boards(a),
        Command::Play(a) => play(a),
        Command::Tournament(a) => run_tournament(a),
        Command::Replay(a) => replay(a),
        Command::Eig(a) => eig(a),
        Command::Guesswho(a) => guesswho(a),
    }
}

fn sample_boards(a: SampleArgs) -> Result<i32, RunError> {
    let config = BoardConfig::default();
    for i in 0..a.count {
        let seed = derive_seed(a.seed, &[i as u64]);
        let board = sample_truth(&config, seed).map_err(|e| RunError::Runtime(e.to_string()))?;
        formats::write_board(&a.out.join(format!("board-{i:03}.board")), &board)?;
    }
    eprintln!("wrote {} boards to {}", a.count, a.out.display());
    Ok(EXIT_OK)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), RunError> {
    match out {
        Some(p) => formats::write_text(p, text)?,
        None => formats::print(text),
    }
    Ok(())
}

fn game_status(outcome: Outcome) -> i32 {
    if outcome == Outcome::Error {
        EXIT_RUNTIME
    } else {
        EXIT_OK
    }
}

fn play(a: PlayArgs) -> Result<i32, RunError> {
    let base = match &a.from {
        Some(p) => formats::read_run_config(p)?,
        None => RunConfig::load(a.run.config.as_deref())?,
    };
    let mut run = a.run.apply(base);
    if a.interactive {
        run.captain = AgentKind::Human;
        if a.run.policy.is_none() && a.from.is_none() {
            run.policy = "lm".into();
        }
    }
    let session = Session::new(&run);
    if run.env == Env::Guesswho {
        let roster = runner::load_roster(run.roster.as_deref())?;
        let traj = runner::play_guesswho(&run, &session, &roster)?;
        emit(a.out.as_deref(), &formats::guess_trajectory_to_jsonl(&run, &traj))?;
        return Ok(game_status(traj.result.outcome));
    }
    let traj = if run.captain == AgentKind::Human {
        let stdin = io::stdin();
        let mut human = TerminalCaptain::new(BufReader::new(stdin.lock()), io::stderr());
        runner::play_battleship(&run, &session, Some(&mut human))?
    } else {
        runner::play_battleship(&run, &session, None)?
    };
    emit(a.out.as_deref(), &formats::trajectory_to_jsonl(&run, &traj))?;
    let m = GameMetrics::of(&traj);
    eprintln!(
        "{}: {:?} in {} moves, {} questions, F1 {:.3}",
        traj.header.board_id, m.outcome, m.moves_used, m.questions_used, m.f1
    );
    if let Some(err) = &traj.result.error {
        eprintln!("game error: {err}");
    }
    Ok(game_status(traj.result.outcome))
}

fn run_tournament(a: TournamentArgs) -> Result<i32, RunError> {
    let mut cfg = TournamentConfig::load(a.run.config.as_deref())?;
    cfg.run = a.run.apply(cfg.run);
    if let Some(p) = a.policies {
        cfg.policies = p.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    if let Some(b) = a.boards {
        cfg.boards = b;
    }
    if a.board_dir.is_some() {
        cfg.board_dir = a.board_dir;
    }
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    if let Some(s) = a.base_seed {
        cfg.base_seed = s;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let result = tournament::run(&cfg)?;
    let paths = tournament::write_outputs(&result, &a.out)?;
    formats::print(&formats::summary_table(&result.report.summary));
    eprintln!("wrote {} trajectories and metrics to {}", paths.len(), a.out.display());
    let errors = result.error_count();
    if errors > 0 {
        eprintln!("{errors} game(s) ended in error");
        return Ok(EXIT_RUNTIME);
    }
    Ok(EXIT_OK)
}

fn yes_no(v: bool) -> &'static str {
    if v {
        "yes"
    } else {
        "no"
    }
}

fn percent_grid(grid: &[f64], cols: usize) -> String {
    let mut out = String::new();
    for row in grid.chunks(cols.max(1)) {
        let cells: Vec<String> = row.iter().map(|p| format!("{:>3.0}", p * 100.0)).collect();
        let _ = writeln!(out, "    {}", cells.join(" "));
    }
    out
}

/// Human-readable rendering of a Battleship trajectory.
pub fn render_replay(traj: &Trajectory, snapshots: bool) -> String {
    let h = &traj.header;
    let mut out = String::new();
    let _ = writeln!(out, "board {}  policy {}  spotter {}", h.board_id, h.policy.name, h.spotter);
    let _ = writeln!(out, "hidden board:\n{}", h.truth);
    let cols = h.config.cols as usize;
    for e in &traj.events {
        match e {
            Event::Snapshot { turn, grid } if snapshots => {
                let _ = write!(out, "turn {turn} hit probabilities (%):\n{}", percent_grid(grid, cols));
            }
            Event::Question { turn, question, eig, .. } => {
                let eig = eig.map(|x| format!(" [EIG {x:.3}]")).unwrap_or_default();
                let _ = writeln!(out, "turn {turn} ask  {question}{eig}");
            }
            Event::Answer { value, truth, .. } => {
                let note = if value == truth { "" } else { " (flipped)" };
                let _ = writeln!(out, "       answer {}{note}", yes_no(*value));
            }
            Event::Shot { turn, coord, hit, sunk, .. } => {
                let what = match (hit, sunk) {
                    (true, Some(c)) => format!("hit, sank {c}"),
                    (true, None) => "hit".into(),
                    _ => "miss".into(),
                };
                let _ = writeln!(out, "turn {turn} fire {coord}: {what}");
            }
            Event::Fallback { turn, reason } => {
                let _ = writeln!(out, "turn {turn} fallback: {reason}");
            }
            _ => {}
        }
    }
    let m = GameMetrics::of(traj);
    let _ = writeln!(
        out,
        "result {:?}: {} moves, {} questions, precision {:.3}, recall {:.3}, F1 {:.3}",
        m.outcome, m.moves_used, m.questions_used, m.precision, m.recall, m.f1
    );
    out
}

fn render_guess_replay(traj: &infoseek_core::guesswho::GuessTrajectory) -> String {
    let h = &traj.header;
    let mut out = String::new();
    let _ = writeln!(out, "target {}  policy {}  budget {}", h.target, h.policy.name, h.budget);
    for e in &traj.events {
        match e {
            GuessEvent::Question { turn, question, eig, candidates, .. } => {
                let _ = writeln!(out, "turn {turn} ask {question} [EIG {eig:.3}, {candidates} candidates]");
            }
            GuessEvent::Answer { value, .. } => {
                let _ = writeln!(out, "       answer {}", yes_no(*value));
            }
            GuessEvent::Guess { turn, name, correct } => {
                let _ = writeln!(out, "turn {turn} guess {name}: {}", if *correct { "correct" } else { "wrong" });
            }
            GuessEvent::Fallback { turn, reason } => {
                let _ = writeln!(out, "turn {turn} fallback: {reason}");
            }
        }
    }
    let _ = writeln!(out, "result {:?}", traj.result.outcome);
    out
}

fn replay(a: ReplayArgs) -> Result<i32, RunError> {
    if formats::trajectory_env(&a.trajectory)? == "guesswho" {
        let g = formats::read_guess_trajectory(&a.trajectory)?;
        formats::print(&render_guess_replay(&g.trajectory));
    } else {
        let g = formats::read_trajectory(&a.trajectory)?;
        formats::print(&render_replay(&g.trajectory, a.snapshots));
    }
    Ok(EXIT_OK)
}

fn eig(a: EigArgs) -> Result<i32, RunError> {
    let state = SavedState::read(&a.state)?;
    let q = Question::parse(&a.question, state.config.rows, state.config.cols)
        .map_err(|e| RunError::Usage(format!("'{}': {e}", a.question)))?;
    let (belief, partial) = state.belief()?;
    let p = belief.yes_probability(&q, &partial);
    let value = belief.eig(&q, &partial);
    formats::print(&format!("{value:.6} bits\n"));
    eprintln!("p(yes) {p:.4}, ceiling {:.6} bits at epsilon {}", max_eig(state.epsilon), state.epsilon);
    Ok(EXIT_OK)
}

fn guesswho(a: GuessArgs) -> Result<i32, RunError> {
    let mut run = a.run.resolve()?;
    run.env = Env::Guesswho;
    if a.run.policy.is_none() && run.policy == RunConfig::default().policy {
        run.policy = "bayes-qm".into();
    }
    if a.roster.is_some() {
        run.roster = a.roster.clone();
    }
    if a.target.is_some() {
        run.target = a.target.clone();
    }
    if let Some(b) = a.budget {
        run.guess_budget = b;
    }
    if a.games == 0 {
        return Err(RunError::Usage("--games must be at least 1".into()));
    }
    let roster = runner::load_roster(run.roster.as_deref())?;
    let session = Session::new(&run);
    let mut wins = 0;
    let mut status = EXIT_OK;
    for i in 0..a.games {
        let game = RunConfig { seed: run.seed + i as u64, ..run.clone() };
        let traj = runner::play_guesswho(&game, &session, &roster)?;
        if traj.result.outcome == Outcome::Win {
            wins += 1;
        }
        status = status.max(game_status(traj.result.outcome));
        if let Some(dir) = &a.out {
            let path = dir.join(format!("guesswho-{:03}.jsonl", i));
            formats::write_text(&path, &formats::guess_trajectory_to_jsonl(&game, &traj))?;
        } else if a.games == 1 {
            formats::print(&formats::guess_trajectory_to_jsonl(&game, &traj));
        }
    }
    eprintln!("success {wins}/{} ({:.3})", a.games, wins as f64 / a.games as f64);
    Ok(status)
}
