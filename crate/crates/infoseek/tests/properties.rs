use infoseek::config::{derive_seed, RunConfig};
use infoseek::formats;
use infoseek::runner::{play_battleship, Session};
use proptest::prelude::*;

const POLICIES: [&str; 4] = ["random", "greedy", "bayes-qm", "bayes-qmd"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn run_configs_survive_toml_and_json(
        gamma in 0.0f64..=1.0,
        k in 1usize..20,
        eps in 0.0f64..0.5,
        seed in 0..=i64::MAX as u64,
        policy in 0usize..POLICIES.len(),
    ) {
        let run = RunConfig {
            policy: POLICIES[policy].into(),
            gamma: Some(gamma),
            k: Some(k),
            channel_epsilon: eps,
            belief_epsilon: eps,
            seed,
            ..Default::default()
        };
        let toml_text = toml::to_string(&run).unwrap();
        prop_assert_eq!(&toml::from_str::<RunConfig>(&toml_text).unwrap(), &run);
        let json = serde_json::to_string(&run).unwrap();
        prop_assert_eq!(&serde_json::from_str::<RunConfig>(&json).unwrap(), &run);
    }

    #[test]
    fn trajectories_round_trip_through_jsonl(seed in 0u64..10_000, policy in 0usize..POLICIES.len()) {
        let run = RunConfig { policy: POLICIES[policy].into(), particles: 150, seed, ..Default::default() };
        let traj = play_battleship(&run, &Session::default(), None).unwrap();
        let text = formats::trajectory_to_jsonl(&run, &traj);
        let back = formats::parse_trajectory(std::path::Path::new("p.jsonl"), &text).unwrap();
        prop_assert_eq!(&back.trajectory, &traj);
        prop_assert_eq!(&back.run, &run);
    }

    #[test]
    fn derived_seeds_separate_their_parts(root in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        prop_assert_ne!(derive_seed(root, &[a]), derive_seed(root, &[b]));
        prop_assert_eq!(derive_seed(root, &[a, b]), derive_seed(derive_seed(root, &[a]), &[b]));
    }
}
