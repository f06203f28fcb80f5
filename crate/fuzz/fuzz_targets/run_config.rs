#![no_main]

use krick_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(text) {
        let _ = cfg.validate();
        let json = cfg.to_json();
        let again = RunConfig::from_json(&json).expect("re-parsing serialised config");
        assert_eq!(again, cfg);
    }
});
