#[path = "common/oracles.rs"]
mod oracles;

use proptest::prelude::*;
use psight_core::evaluation::{ac, association_counts, ega, pcr, split_corpus, generate_planted_corpus, Count, GroupingChannel, PlantedConfig};

#[test]
fn metrics_match_hand_computed_cases() {
    let cases = oracles::metric_cases();
    assert!(cases.len() >= 12);
    for c in &cases {
        let (m, h) = (oracles::letters(&c.model), oracles::letters(&c.human));
        let got = (ega(&m, &h).unwrap(), pcr(&m, &h).unwrap(), ac(&m, &h));
        assert!((got.0 - c.ega).abs() < 1e-12, "{}: ega {}", c.name, got.0);
        assert!((got.1 - c.pcr).abs() < 1e-12, "{}: pcr {}", c.name, got.1);
        assert!((got.2 - c.ac).abs() < 1e-12, "{}: ac {}", c.name, got.2);
    }
}

#[test]
fn association_counts_are_upper_triangle() {
    let counts = association_counts(&oracles::letters(&["abc", "ab", "ba"]));
    assert_eq!(counts[&('a', 'b')], 3);
    assert_eq!(counts[&('a', 'c')], 1);
    assert_eq!(counts.len(), 3);
}

#[test]
fn planted_split_is_sixteen_four() {
    let planted = generate_planted_corpus(&PlantedConfig {
        n_charts: 20,
        groups_per_chart: Count::Range([2, 3]),
        elements_per_group: Count::Range([3, 6]),
        grouping_channel: GroupingChannel::FillHue,
        seed: 1,
    });
    let (train, test) = split_corpus(&planted.corpus, 0.8);
    assert_eq!((train.charts.len(), test.charts.len()), (16, 4));
    assert!(test.annotations.iter().all(|a| test.chart(&a.chart_id).is_some()));
}

fn group_list() -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0u8..10, 1..6), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metrics_stay_in_unit_range(m in group_list(), h in group_list()) {
        for v in [ega(&m, &h).unwrap(), pcr(&m, &h).unwrap(), ac(&m, &h)] {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v), "{v}");
        }
        prop_assert_eq!(ega(&m, &h).unwrap(), pcr(&h, &m).unwrap());
        prop_assert!((ega(&m, &m).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((pcr(&h, &h).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ac_ignores_repetition(m in group_list(), h in group_list(), times in 2usize..4) {
        let repeated: Vec<Vec<u8>> = m.iter().cloned().cycle().take(m.len() * times).collect();
        prop_assert!((ac(&m, &h) - ac(&repeated, &h)).abs() < 1e-12);
    }
}
