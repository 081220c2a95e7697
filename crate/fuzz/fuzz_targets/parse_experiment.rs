#![no_main]

use libfuzzer_sys::fuzz_target;

// Config parsing and validation must never panic; running the experiment is
// deliberately out of scope (arbitrary configs can be arbitrarily slow).
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = caching_games::experiment::parse_experiment(text);
    }
});
