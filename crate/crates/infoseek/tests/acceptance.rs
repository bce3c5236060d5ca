//! Acceptance criteria, run at their stated sizes and tolerances. Prints one
//! PASS/FAIL line per criterion, then fails if any criterion did.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use infoseek::config::{Env, RunConfig, SpotterKind, TournamentConfig};
use infoseek::formats;
use infoseek::runner::{load_roster, play_battleship, play_guesswho, Session};
use infoseek::tournament;
use infoseek_core::belief::{eig_from_yes_probability, exact_posterior};
use infoseek_core::board::reveal;
use infoseek_core::engine::{sample_truth, Outcome};
use infoseek_core::metrics::{summarize, win_rate, GameMetrics, PolicySummary, REDUNDANT_EIG};
use infoseek_core::question::enumerate_candidates;
use infoseek_core::strategy::{decide, Action, Budgets, TurnContext};
use infoseek_core::{
    Atom, Board, BoardConfig, CaptainPolicy, Cmp, Color, Coord, LoggedAnswer, ParticleBelief, PartialBoard, Question,
    Region, SpotterChannel,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn report(n: usize, name: &str, v: &Verdict) {
    let line = format!("{} {n:>2} {name}: {}\n", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    // Written to the raw handle so the line survives libtest's output capture.
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn random_coord<R: Rng>(rng: &mut R, rows: u8, cols: u8) -> Coord {
    Coord::new(rng.gen_range(0..rows), rng.gen_range(0..cols))
}

fn random_region<R: Rng>(rng: &mut R, rows: u8, cols: u8) -> Region {
    match rng.gen_range(0..4) {
        0 => Region::Rect(random_coord(rng, rows, cols), random_coord(rng, rows, cols)),
        1 => Region::Row(rng.gen_range(0..rows)),
        2 => Region::Col(rng.gen_range(0..cols)),
        _ => Region::Tiles((0..rng.gen_range(1..5)).map(|_| random_coord(rng, rows, cols)).collect()),
    }
}

fn random_atom<R: Rng>(rng: &mut R, rows: u8, cols: u8) -> Atom {
    let color = *Color::ALL.choose(rng).unwrap();
    let cmp = *[Cmp::Eq, Cmp::Lt, Cmp::Gt, Cmp::Le, Cmp::Ge].choose(rng).unwrap();
    match rng.gen_range(0..9) {
        0 => Atom::TileShip(random_coord(rng, rows, cols)),
        1 => Atom::TileColor(random_coord(rng, rows, cols), color),
        2 => Atom::AnyShip(random_region(rng, rows, cols)),
        3 => Atom::CountShip(random_region(rng, rows, cols), cmp, rng.gen_range(0..6)),
        4 => Atom::ShipLength(color, cmp, rng.gen_range(1..6)),
        5 => Atom::ShipHorizontal(color),
        6 => Atom::ShipsTouching(color, *Color::ALL.choose(rng).unwrap()),
        7 => Atom::AnyUnrevealedShip(random_region(rng, rows, cols)),
        _ => Atom::ShipSunk(color),
    }
}

fn random_question<R: Rng>(rng: &mut R, rows: u8, cols: u8, depth: u32) -> Question {
    if depth == 0 || rng.gen_bool(0.4) {
        return Question::Atom(random_atom(rng, rows, cols));
    }
    let n = rng.gen_range(2..4);
    match rng.gen_range(0..3) {
        0 => Question::not(random_question(rng, rows, cols, depth - 1)),
        1 => Question::And((0..n).map(|_| random_question(rng, rows, cols, depth - 1)).collect()),
        _ => Question::Or((0..n).map(|_| random_question(rng, rows, cols, depth - 1)).collect()),
    }
}

/// `truth` with `k` random distinct tiles revealed.
fn random_view<R: Rng>(rng: &mut R, truth: &Board, k: usize) -> PartialBoard {
    let cols = truth.cols();
    let mut idx: Vec<usize> = (0..truth.rows() as usize * cols as usize).collect();
    idx.shuffle(rng);
    let mut p = PartialBoard::hidden(truth.rows(), cols);
    for &i in idx.iter().take(k) {
        p = reveal(truth, &p, Coord::from_index(i, cols)).unwrap().partial;
    }
    p
}

fn grid_tv(a: &[f64], b: &[f64]) -> f64 {
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if sa == 0.0 && sb == 0.0 {
        return 0.0;
    }
    0.5 * a.iter().zip(b).map(|(x, y)| (x / sa - y / sb).abs()).sum::<f64>()
}

fn state_belief(seed: u64, n: usize) -> (BoardConfig, PartialBoard, ParticleBelief) {
    let config = BoardConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = sample_truth(&config, seed).unwrap();
    let k = rng.gen_range(0..24);
    let partial = random_view(&mut rng, &truth, k);
    let belief = ParticleBelief::init(&config, &partial, n, 0.1, &mut rng).unwrap();
    (config, partial, belief)
}

fn criterion_1() -> Verdict {
    let peak = eig_from_yes_probability(0.5, 0.1);
    let worst = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let (config, partial, belief) = state_belief(10_000 + i / 50, 300);
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let q = random_question(&mut rng, config.rows, config.cols, 3);
            (belief.eig(&q, &partial) - belief.eig(&Question::not(q), &partial)).abs()
        })
        .reduce(|| 0.0, f64::max);
    verdict(
        (peak - 0.531).abs() <= 1e-3 && worst <= 1e-12,
        format!("eig(p=0.5, eps=0.1) = {peak:.5} bits; max |eig(q) - eig(not q)| over 1000 questions = {worst:.1e}"),
    )
}

/// Random, Greedy, Bayes-QM and Bayes-QMD on the same 200 boards.
fn ladder() -> tournament::TournamentResult {
    let cfg = TournamentConfig {
        policies: ["random", "greedy", "bayes-qm", "bayes-qmd"].map(String::from).to_vec(),
        boards: 200,
        seeds: 1,
        base_seed: 2025,
        workers: 0,
        board_dir: None,
        run: RunConfig { spotter: SpotterKind::Noisy, channel_epsilon: 0.1, particles: 2000, ..Default::default() },
    };
    tournament::run(&cfg).unwrap()
}

fn row<'a>(l: &'a tournament::TournamentResult, p: &str) -> &'a PolicySummary {
    l.report.summary.iter().find(|s| s.policy == p).unwrap()
}

fn criterion_2(l: &tournament::TournamentResult) -> Verdict {
    let r = row(l, "random");
    let games: Vec<&GameMetrics> = l.report.games.iter().filter(|g| g.policy == "random").collect();
    let all_40 = games.iter().all(|g| g.moves_used == 40);
    verdict(
        r.games == 200
            && (r.precision - 0.210).abs() <= 0.03
            && (r.recall - 0.665).abs() <= 0.05
            && (r.f1 - 0.317).abs() <= 0.04
            && all_40,
        format!(
            "{} games: precision {:.3}, recall {:.3}, F1 {:.3}, every game 40 moves: {all_40}",
            r.games, r.precision, r.recall, r.f1
        ),
    )
}

fn criterion_3(l: &tournament::TournamentResult) -> Verdict {
    let r = row(l, "greedy");
    verdict(
        r.games == 200 && (r.f1 - 0.614).abs() <= 0.05 && (r.moves - 28.8).abs() <= 2.5 && r.recall >= 0.97,
        format!("{} games, N=2000: F1 {:.3}, moves {:.2}, recall {:.3}", r.games, r.f1, r.moves, r.recall),
    )
}

fn criterion_4() -> Verdict {
    let config = BoardConfig::fixed(4, 4, &[(Color::Red, 2), (Color::Green, 3)]);
    let tvs: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(400 + s);
            let truth = sample_truth(&config, 900 + s).unwrap();
            let mut partial = PartialBoard::for_config(&config);
            let mut belief = ParticleBelief::init(&config, &partial, 5000, 0.1, &mut rng).unwrap();
            let mut hidden: Vec<usize> = (0..16).collect();
            hidden.shuffle(&mut rng);
            for &i in &hidden[..3] {
                partial = reveal(&truth, &partial, Coord::from_index(i, 4)).unwrap().partial;
                belief.update_reveal(&partial, &mut rng).unwrap();
            }
            let mut log = Vec::new();
            let mut channel = SpotterChannel::noisy(0.1).unwrap();
            for _ in 0..2 {
                let q = random_question(&mut rng, 4, 4, 2);
                let heard = channel.answer(&q, &truth, &partial, &mut rng).unwrap().value;
                belief.update_answer(&q, heard, &partial, &mut rng).unwrap();
                log.push(LoggedAnswer { question: q, answer: heard, view: partial.clone() });
            }
            let exact = exact_posterior(&config, &partial, &log, 0.1).unwrap();
            grid_tv(belief.hit_probability_grid(&partial).probs(), exact.hit_grid(&partial).probs())
        })
        .collect();
    let worst = tvs.iter().cloned().fold(0.0, f64::max);
    let mean = tvs.iter().sum::<f64>() / tvs.len() as f64;
    verdict(worst < 0.05, format!("20 scenarios at N=5000: hit-grid TV max {worst:.4}, mean {mean:.4}"))
}

fn criterion_5() -> Verdict {
    let epsilons = [0.0, 0.05, 0.1, 0.2, 0.3];
    let gaps: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|t| {
            let eps = epsilons[t as usize % epsilons.len()];
            let (config, partial, b) = state_belief(500 + t, 400);
            let belief = ParticleBelief::from_particles(config.clone(), b.particles().to_vec(), eps);
            let mut rng = ChaCha8Rng::seed_from_u64(t);
            let q = loop {
                let q = random_question(&mut rng, config.rows, config.cols, 2);
                let p = belief.yes_probability(&q, &partial);
                if p > 0.05 && p < 0.95 {
                    break q;
                }
            };
            let bits = belief.answer_vector(&q, &partial);
            let weights = belief.weights();
            let mut cumulative = Vec::with_capacity(weights.len());
            let mut acc = 0.0;
            for w in weights {
                acc += w;
                cumulative.push(acc);
            }
            // Joint counts of (true answer, heard answer).
            let mut joint = [[0u64; 2]; 2];
            let sims = 100_000;
            for _ in 0..sims {
                let u: f64 = rng.gen::<f64>() * acc;
                let i = cumulative.partition_point(|&c| c < u).min(weights.len() - 1);
                let truth = bits.get(i);
                let heard = truth ^ (rng.gen::<f64>() < eps);
                joint[truth as usize][heard as usize] += 1;
            }
            let n = sims as f64;
            let mut mi = 0.0;
            for a in 0..2 {
                for h in 0..2 {
                    let pj = joint[a][h] as f64 / n;
                    let pa = (joint[a][0] + joint[a][1]) as f64 / n;
                    let ph = (joint[0][h] + joint[1][h]) as f64 / n;
                    if pj > 0.0 {
                        mi += pj * (pj / (pa * ph)).log2();
                    }
                }
            }
            (mi - belief.eig(&q, &partial)).abs()
        })
        .collect();
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    verdict(worst <= 0.02, format!("20 triples, 1e5 simulations each: max |MI - EIG| = {worst:.4} bits"))
}

fn criterion_6() -> Verdict {
    let ks = [1usize, 2, 5, 10];
    let per_state: Vec<[f64; 4]> = (0..200u64)
        .into_par_iter()
        .map(|s| {
            let (config, partial, belief) = state_belief(7_000 + s, 500);
            let mut out = [0.0; 4];
            for (j, &k) in ks.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let c = enumerate_candidates(&partial, &config, k, belief.particles(), Some(belief.weights()), &mut rng);
                out[j] = c.vectors.iter().map(|v| belief.eig_of(v)).fold(0.0, f64::max);
            }
            out
        })
        .collect();
    let means: Vec<f64> = (0..4).map(|j| per_state.iter().map(|r| r[j]).sum::<f64>() / 200.0).collect();
    let monotone = means.windows(2).all(|w| w[1] >= w[0] - 1e-3);

    let games: Vec<GameMetrics> = (0..40u64)
        .into_par_iter()
        .map(|seed| {
            let run = RunConfig { policy: "bayes-qm".into(), particles: 1000, seed: 60_000 + seed, ..Default::default() };
            GameMetrics::of(&play_battleship(&run, &Session::default(), None).unwrap())
        })
        .collect();
    let asked: u32 = games.iter().map(|g| g.questions_used).sum();
    let redundant: f64 = games.iter().map(|g| g.redundant_fraction.unwrap_or(0.0) * g.questions_used as f64).sum();
    let rate = redundant / asked.max(1) as f64;
    verdict(
        monotone && rate == 0.0 && asked > 0,
        format!(
            "mean selected EIG k=1,2,5,10: {:.4} {:.4} {:.4} {:.4}; redundant rate {rate} over {asked} Bayes-Q questions (EIG <= {REDUNDANT_EIG:e})",
            means[0], means[1], means[2], means[3]
        ),
    )
}

fn criterion_7(l: &tournament::TournamentResult) -> Verdict {
    let f1 = |p: &str| row(l, p).f1;
    let (r, g, qm, qmd) = (f1("random"), f1("greedy"), f1("bayes-qm"), f1("bayes-qmd"));
    let of = |p: &str| -> Vec<GameMetrics> { l.report.games.iter().filter(|m| m.policy == p).cloned().collect() };
    let wr = win_rate(&of("bayes-qmd"), &of("greedy")).unwrap();
    verdict(
        r < g && g <= qm && qm <= qmd && wr > 0.55,
        format!("F1 random {r:.3} < greedy {g:.3} <= bayes-qm {qm:.3} <= bayes-qmd {qmd:.3}; win_rate(QMD, Greedy) {wr:.3}"),
    )
}

fn criterion_8(l: &tournament::TournamentResult) -> Verdict {
    let zero: Vec<u32> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let run = RunConfig { policy: "bayes-qmd".into(), gamma: Some(0.0), particles: 2000, seed: 80_000 + seed, ..Default::default() };
            play_battleship(&run, &Session::default(), None).unwrap().result.questions_used
        })
        .collect();
    let asked_at_zero: u32 = zero.iter().sum();

    // First decision on fresh boards at gamma = 1.
    let policy = CaptainPolicy::preset("bayes-qmd").unwrap().with_gamma(1.0);
    let config = BoardConfig::default();
    let first_asks = (0..200u64)
        .into_par_iter()
        .filter(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(90_000 + s);
            let partial = PartialBoard::for_config(&config);
            let belief = ParticleBelief::init(&config, &partial, 2000, 0.1, &mut rng).unwrap();
            let ctx = TurnContext {
                config: &config,
                belief: Some(&belief),
                partial: &partial,
                budgets: Budgets { questions_left: config.question_budget, moves_left: config.move_budget },
                history: &[],
            };
            matches!(decide(&policy, &ctx, None, &mut rng).unwrap().action, Action::Ask(_))
        })
        .count();
    let qmd: Vec<&GameMetrics> = l.report.games.iter().filter(|g| g.policy == "bayes-qmd").collect();
    let games_asking = qmd.iter().filter(|g| g.questions_used >= 1).count();
    let frac = games_asking as f64 / qmd.len() as f64;
    verdict(
        asked_at_zero == 0 && frac >= 0.9 && first_asks as f64 / 200.0 >= 0.9,
        format!(
            "gamma=0: {asked_at_zero} questions over 100 games; gamma=1: asked in {games_asking}/{} games, asked first on {first_asks}/200 fresh boards",
            qmd.len()
        ),
    )
}

/// Wilson score interval at z.
fn wilson(successes: usize, n: usize, z: f64) -> (f64, f64) {
    let (k, n) = (successes as f64, n as f64);
    let p = k / n;
    let d = 1.0 + z * z / n;
    let c = (p + z * z / (2.0 * n)) / d;
    let h = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / d;
    (c - h, c + h)
}

fn criterion_9() -> Verdict {
    let roster = load_roster(None).unwrap();
    let base = RunConfig {
        env: Env::Guesswho,
        policy: "bayes-qm".into(),
        spotter: SpotterKind::Oracle,
        belief_epsilon: 0.0,
        channel_epsilon: 0.0,
        guess_budget: 8,
        ..Default::default()
    };
    let play = |budget: u32, seed: u64| {
        let run = RunConfig { guess_budget: budget, seed, ..base.clone() };
        play_guesswho(&run, &Session::default(), &roster).unwrap().result.outcome == Outcome::Win
    };
    let wins8 = (0..50u64).into_par_iter().filter(|&s| play(8, 1_000 + s)).count();
    let n0 = 2000;
    let wins0 = (0..n0 as u64).into_par_iter().filter(|&s| play(0, 5_000 + s)).count();
    let (lo, hi) = wilson(wins0, n0, 2.576);
    verdict(
        wins8 as f64 / 50.0 >= 0.95 && (lo..=hi).contains(&0.01),
        format!(
            "budget 8: {wins8}/50 wins; budget 0: {wins0}/{n0} wins, 99% interval [{lo:.4}, {hi:.4}] around 1/100"
        ),
    )
}

fn criterion_10(l: &tournament::TournamentResult) -> Verdict {
    let presets = ["random", "greedy", "lm", "bayes-q", "bayes-m", "bayes-qm", "bayes-qmd"];
    let identical = presets.par_iter().all(|p| {
        let run = RunConfig { policy: (*p).into(), particles: 1000, seed: 31, snapshots: true, ..Default::default() };
        let a = formats::trajectory_to_jsonl(&run, &play_battleship(&run, &Session::default(), None).unwrap());
        let b = formats::trajectory_to_jsonl(&run, &play_battleship(&run, &Session::default(), None).unwrap());
        a == b
    });
    let small = TournamentConfig {
        policies: vec!["greedy".into(), "bayes-qmd".into()],
        boards: 4,
        seeds: 2,
        run: RunConfig { particles: 500, ..Default::default() },
        ..Default::default()
    };
    let one = tournament::run(&TournamentConfig { workers: 1, ..small.clone() }).unwrap();
    let many = tournament::run(&TournamentConfig { workers: 4, ..small }).unwrap();
    let worker_free = one.trajectories == many.trajectories;

    let w = &l.report.win_rates;
    let mut worst: f64 = 0.0;
    for i in 0..w.len() {
        for j in 0..w.len() {
            worst = worst.max((w[i][j].unwrap() + w[j][i].unwrap() - 1.0).abs());
        }
    }
    verdict(
        identical && worker_free && worst <= 1e-12,
        format!(
            "byte-identical reruns for all 7 presets: {identical}; 1 vs 4 workers identical: {worker_free}; max |wr(A,B) + wr(B,A) - 1| = {worst:.1e}"
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let mut verdicts: Vec<(usize, &str, Verdict)> = Vec::new();
    let mut record = |n, name, v: Verdict| {
        report(n, name, &v);
        verdicts.push((n, name, v));
    };
    record(1, "EIG closed form", criterion_1());
    let ladder = ladder();
    record(2, "Random baseline", criterion_2(&ladder));
    record(3, "Greedy baseline", criterion_3(&ladder));
    record(4, "SMC vs exact posterior", criterion_4());
    record(5, "EIG vs empirical mutual information", criterion_5());
    record(6, "Bayes-Q scaling and deduplication", criterion_6());
    record(7, "Strategy ladder ordering", criterion_7(&ladder));
    record(8, "Lookahead sanity", criterion_8(&ladder));
    record(9, "Guess Who", criterion_9());
    record(10, "Determinism and win-rate algebra", criterion_10(&ladder));
    let summary: Vec<PolicySummary> =
        ["random", "greedy", "bayes-qm", "bayes-qmd"].iter().map(|p| {
            let g: Vec<GameMetrics> = ladder.report.games.iter().filter(|m| m.policy == *p).cloned().collect();
            summarize(p, &g)
        }).collect();
    let _ = std::io::stderr().write_all(formats::summary_table(&summary).as_bytes());
    let failed: Vec<String> = verdicts.iter().filter(|(_, _, v)| !v.pass).map(|(n, name, _)| format!("{n} {name}")).collect();
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
