//! Fuzz the sweep width-list parser: must never panic, and every list it
//! accepts must be non-empty, finite, positive, and strictly increasing for
//! range specs.

#![no_main]

use libfuzzer_sys::fuzz_target;
use popper_core::app::parse_widths;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(widths) = parse_widths(text) {
        assert!(!widths.is_empty(), "accepted an empty width list: {text:?}");
        for w in &widths {
            assert!(
                w.m().is_finite() && w.m() > 0.0,
                "accepted a non-physical width {} from {text:?}",
                w.m()
            );
        }
        if text.contains(':') {
            for pair in widths.windows(2) {
                assert!(
                    pair[1].m() > pair[0].m(),
                    "range spec {text:?} is not strictly increasing"
                );
            }
        }
    }
});
