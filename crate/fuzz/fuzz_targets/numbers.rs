#![no_main]

use krick_cli::numbers::{parse_anchors, parse_count, parse_grid};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(n) = parse_count(text) {
        assert_eq!(parse_count(&n.to_string()).unwrap(), n);
    }
    if let Ok(g) = parse_grid(text) {
        assert!(g.len() <= krick_cli::numbers::MAX_GRID + 1);
    }
    if let Ok(a) = parse_anchors(text) {
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|&x| x > 0.0));
    }
});
