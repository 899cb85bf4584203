//! Fuzz the unit-suffixed quantity parser: must never panic, and any value it
//! accepts must survive a format → reparse round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use popper_core::quantities::parse_length;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(len) = parse_length(text) {
        // Finite values render as "<shortest-repr> m"; the open limit renders
        // as the bare "inf" literal, matching how scenarios are written out.
        let shown = if len.m().is_finite() {
            format!("{} m", len.m())
        } else {
            "inf".to_string()
        };
        let reparsed = parse_length(&shown).expect("formatted length reparses");
        assert_eq!(
            reparsed.m(),
            len.m(),
            "round trip drifted: {text:?} -> {} -> {}",
            len.m(),
            reparsed.m()
        );
    }
});
