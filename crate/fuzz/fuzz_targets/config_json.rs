#![no_main]

use libfuzzer_sys::fuzz_target;

use graphheat::config::ExperimentConfig;

// Parsing plus full schema validation of an experiment document must
// never panic; Ok and Err are both fine. Validation builds graph
// descriptors, so rule parsing and family constructors are exercised
// too.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = ExperimentConfig::from_json(text);
    }
});
