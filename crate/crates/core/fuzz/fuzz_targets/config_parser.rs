#![no_main]

use libfuzzer_sys::fuzz_target;
use raqr::config::load_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = load_config(text) {
            // anything accepted must survive its own serialization
            assert_eq!(load_config(&cfg.serialize()).as_ref(), Ok(&cfg));
        }
    }
});
