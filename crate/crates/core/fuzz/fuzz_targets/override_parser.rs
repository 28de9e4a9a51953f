#![no_main]

use libfuzzer_sys::fuzz_target;
use raqr::config::{load_with_overrides, parse_override};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(pair) = parse_override(text) {
        let _ = load_with_overrides("preset = table1\n", &[pair]);
    }
});
