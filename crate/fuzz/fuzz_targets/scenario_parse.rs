//! Fuzz the scenario TOML decoder: must never panic, and any scenario it
//! accepts must survive a serialize → reparse round trip with an identical
//! canonical hash.

#![no_main]

use libfuzzer_sys::fuzz_target;
use popper_core::app::{canonical_hash, scenario_from_toml, scenario_to_toml};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(sc) = scenario_from_toml(text) {
        let rewritten = scenario_to_toml(&sc);
        let reparsed = scenario_from_toml(&rewritten).expect("serialized scenario reparses");
        assert_eq!(
            canonical_hash(&sc),
            canonical_hash(&reparsed),
            "canonical hash drifted through a round trip"
        );
    }
});
