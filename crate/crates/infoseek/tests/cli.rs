use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use infoseek_core::belief::max_eig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infoseek"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn tournament_writes_the_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["tournament", "--policies", "random,greedy", "--boards", "18", "--seeds", "3", "--particles", "300", "--out", "t"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let trajs = std::fs::read_dir(dir.path().join("t/trajectories")).unwrap().count();
    assert_eq!(trajs, 2 * 18 * 3);
    let summary = std::fs::read_to_string(dir.path().join("t/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    let metrics = std::fs::read_to_string(dir.path().join("t/metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 109);
    let wins = std::fs::read_to_string(dir.path().join("t/win_rates.csv")).unwrap();
    assert!(wins.starts_with("policy,random,greedy"));
}

#[test]
fn eig_stays_within_the_channel_ceiling() {
    let dir = tempfile::tempdir().unwrap();
    let hidden = vec!["-1 -1 -1 -1 -1 -1 -1 -1"; 8].join("\n");
    let state = serde_json::json!({
        "partial": hidden,
        "answers": [{"question": "(tile-ship D4)", "answer": true}],
        "epsilon": 0.1,
        "particles": 1000,
        "seed": 2
    });
    std::fs::write(dir.path().join("s.json"), state.to_string()).unwrap();
    for q in ["(any-ship (row C))", "(tile-ship A1)", "(ship-horizontal red)"] {
        let o = run(dir.path(), &["eig", "--state", "s.json", "--question", q]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let value: f64 = text.split_whitespace().next().unwrap().parse().unwrap();
        assert!((0.0..=max_eig(0.1) + 1e-9).contains(&value), "{q}: {value}");
    }
}

#[test]
fn same_seed_gives_identical_trajectory_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.jsonl", "b.jsonl"] {
        let o = run(dir.path(), &["play", "--policy", "bayes-qmd", "--seed", "7", "--particles", "500", "--out", name]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.jsonl")).unwrap());

    let o = run(dir.path(), &["play", "--from", "a.jsonl", "--out", "c.jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(a, std::fs::read(dir.path().join("c.jsonl")).unwrap());
}

#[test]
fn replay_prints_turns_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["play", "--policy", "bayes-qmd", "--seed", "1", "--particles", "300", "--snapshots", "--out", "t.jsonl"]);
    let o = run(dir.path(), &["replay", "t.jsonl", "--snapshots"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("turn 0 hit probabilities"));
    assert!(text.contains(" fire "));
    assert!(text.lines().last().unwrap().starts_with("result"));
}

#[test]
fn sampled_boards_can_be_played() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sample-boards", "--count", "2", "--seed", "5", "--out", "b"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(dir.path(), &["play", "--board", "b/board-001.board", "--policy", "greedy", "--particles", "300"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"board_id\":\"board-001\""));
    let o = run(dir.path(), &["tournament", "--board-dir", "b", "--policies", "random", "--seeds", "2", "--out", "t"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(dir.path().join("t/trajectories")).unwrap().count(), 4);
}

#[test]
fn exit_codes_separate_user_and_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["play", "--gamma", "2"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["play", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["eig", "--state", "missing.json", "--question", "(tile-ship A1)"]).status.code(), Some(1));
    // An lm captain with a bad endpoint key ends the game in error.
    let o = bin()
        .current_dir(dir.path())
        .args(["play", "--policy", "lm", "--captain", "llm", "--particles", "200"])
        .env_remove("INFOSEEK_API_KEY")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "missing key is a configuration problem");
    // A noiseless belief facing a coin-flip spotter runs out of particles.
    let o = run(
        dir.path(),
        &["play", "--belief-epsilon", "0", "--channel-epsilon", "0.5", "--seed", "1", "--particles", "300", "--out", "e.jsonl"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(std::fs::read_to_string(dir.path().join("e.jsonl")).unwrap().contains("\"outcome\":\"error\""));
}

#[test]
fn interactive_play_reads_the_terminal() {
    let dir = tempfile::tempdir().unwrap();
    let mut child = bin()
        .current_dir(dir.path())
        .args(["play", "--interactive", "--seed", "3", "--particles", "200", "--move-budget", "3", "--out", "h.jsonl"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"(any-ship (row A))\nA1\nB2\nC3\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("h.jsonl")).unwrap();
    assert!(text.contains("(any-ship (row A))"));
    assert_eq!(text.matches("\"type\":\"shot\"").count(), 3);
}

#[test]
fn guesswho_runs_bundled_rosters() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["guesswho", "--roster", "classic", "--games", "5", "--spotter", "oracle", "--belief-epsilon", "0", "--out", "g"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("success 5/5"));
    let first = std::fs::read_to_string(dir.path().join("g/guesswho-000.jsonl")).unwrap();
    assert!(first.lines().next().unwrap().contains("\"env\":\"guesswho\""));
    let o = run(dir.path(), &["replay", "g/guesswho-000.jsonl"]);
    assert!(stdout(&o).contains("guess"));
}
