//! Full validation-suite run at the default resolution: every comparison
//! must converge and land inside its tolerance, with the strict (half
//! tolerance) margin intact.

use popper_core::oracle::{run_suite, DEFAULT_GRID_N, SUITE_CHECKS};

#[test]
fn full_suite_passes_with_strict_headroom() {
    let reports = run_suite(None, DEFAULT_GRID_N).unwrap();
    assert!(!reports.is_empty());
    for r in &reports {
        assert!(
            r.passed_strict(),
            "{}: rel_err {:.3e} vs tolerance {:.3e} (converged: {}, n = {})",
            r.quantity,
            r.rel_err,
            r.tolerance,
            r.converged,
            r.n,
        );
    }
}

#[test]
fn unknown_check_name_is_rejected() {
    assert!(run_suite(Some("nonsense"), DEFAULT_GRID_N).is_err());
    for name in SUITE_CHECKS {
        // Every advertised name must be runnable (cheap resolution).
        assert!(run_suite(Some(name), 128).is_ok(), "{name}");
    }
}
