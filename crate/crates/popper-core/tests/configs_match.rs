//! The checked-in scenario files are the presets, byte for byte — editing
//! either side without the other fails here.

use std::path::PathBuf;

use popper_core::app::{canonical_hash, load_scenario, scenario_to_toml, Preset};

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.toml"))
}

#[test]
fn checked_in_configs_are_the_presets_byte_for_byte() {
    for preset in Preset::ALL {
        let path = config_path(preset.name());
        let on_disk = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
        assert_eq!(
            on_disk,
            scenario_to_toml(&preset.scenario()),
            "{} drifted from its preset",
            path.display()
        );

        let loaded = load_scenario(&path).unwrap();
        assert_eq!(loaded, preset.scenario());
        assert_eq!(canonical_hash(&loaded), canonical_hash(&preset.scenario()));
    }
}
