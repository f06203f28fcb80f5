use krick_cli::numbers::{parse_anchors, parse_count, parse_grid};
use proptest::prelude::*;

proptest! {
    #[test]
    fn plain_counts_round_trip(n in any::<u64>()) {
        prop_assert_eq!(parse_count(&n.to_string()).unwrap(), n);
    }

    #[test]
    fn scientific_counts_match_their_value(m in 1u64..1000, e in 0u32..15) {
        let want = m * 10u64.pow(e);
        prop_assert_eq!(parse_count(&format!("{m}e{e}")).unwrap(), want);
        let grouped = want.to_string().as_bytes().rchunks(3).rev().map(|c| std::str::from_utf8(c).unwrap()).collect::<Vec<_>>().join("_");
        prop_assert_eq!(parse_count(&grouped).unwrap(), want);
    }

    #[test]
    fn parsers_never_panic(s in "\\PC{0,40}") {
        let _ = parse_count(&s);
        let _ = parse_grid(&s);
        let _ = parse_anchors(&s);
    }

    #[test]
    fn log_grids_are_increasing_anchors(lo in 1e-3f64..1e3, decades in 0.0f64..4.0, per in 1u64..8) {
        let hi = lo * 10f64.powf(decades);
        let g = parse_anchors(&format!("{lo}:{hi}:{per}")).unwrap();
        prop_assert!((g[0] - lo).abs() <= 1e-12 * lo);
        prop_assert!(*g.last().unwrap() <= hi * (1.0 + 1e-12));
    }
}
