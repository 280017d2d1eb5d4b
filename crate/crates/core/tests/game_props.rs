mod common;

use common::*;
use instgov::exec::Execution;
use instgov::game::{min_dominating_sanction, parse_game, pure_nash, pure_nash_with, transform, SanctionProfile};
use instgov::sim::synth;
use proptest::prelude::*;

#[test]
fn fixture_thresholds() {
    for name in GAME_FIXTURES {
        check_sanction_threshold(&fixture_game(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn prisoners_dilemma_values() {
    let fx = parse_game(&fixture_text("pd.game")).unwrap();
    let g = &fx.game;
    assert_eq!(nash_oracle(g), vec![vec![1, 1]]);
    assert_eq!(min_dominating_sanction(g, 0).unwrap(), int(2));
    let g2 = transform(g, &fx.sanctions).unwrap();
    assert_eq!(pure_nash(&g2).pure_nash, vec![vec![0, 0]]);
    assert_eq!(g2.strictly_dominant(0), Some(0));
}

#[test]
fn chicken_has_two_equilibria() {
    let g = fixture_game("chicken.game");
    assert_eq!(pure_nash(&g).pure_nash, vec![vec![0, 1], vec![1, 0]]);
    assert_eq!(min_dominating_sanction(&g, 0).unwrap(), int(1));
}

#[test]
fn extra_compliant_actions_have_no_threshold() {
    let g = fixture_game("market.game");
    assert!(min_dominating_sanction(&g, 1).is_err());
    assert_eq!(min_dominating_sanction(&g, 0).unwrap(), int(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transform_is_elementwise(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let g = synth::random_game(&mut rng, 3, 3);
        let s = synth::random_sanction(&mut rng, &g);
        let g2 = transform(&g, &s).unwrap();
        for idx in 0..g.profile_count() {
            for i in 0..g.players.len() {
                prop_assert_eq!(&g2.payoffs[idx][i], &(&g.payoffs[idx][i] - &s.values[idx][i]));
            }
        }
        let same = transform(&g, &SanctionProfile::zero(&g)).unwrap();
        prop_assert_eq!(&same.payoffs, &g.payoffs);
        prop_assert_eq!(&same.actions, &g.actions);
    }

    #[test]
    fn nash_matches_enumeration(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let g = synth::random_game(&mut rng, 3, 3);
        let expected = nash_oracle(&g);
        prop_assert_eq!(&pure_nash_with(Execution::Sequential, &g).pure_nash, &expected);
        prop_assert_eq!(&pure_nash_with(Execution::Parallel, &g).pure_nash, &expected);
    }

    #[test]
    fn threshold_holds_on_random_games(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let g = synth::random_game(&mut rng, 3, 3);
        prop_assert!(check_sanction_threshold(&g).is_ok(), "{:?}", check_sanction_threshold(&g));
    }

    #[test]
    fn display_round_trips(seed in any::<u64>()) {
        let mut rng = synth::rng(seed);
        let g = synth::random_game(&mut rng, 3, 3);
        prop_assert_eq!(parse_game(&g.to_string()).unwrap().game, g);
    }
}
