#![no_main]

use krick::model::ModelConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ModelConfig::from_json(text) {
        // anything accepted must survive a round trip
        let again = ModelConfig::from_json(&cfg.to_json()).expect("re-parsing serialised config");
        assert_eq!(again, cfg);
        let _ = cfg.params();
    }
});
