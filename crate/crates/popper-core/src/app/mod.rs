//! Application layer: scenario files and presets, the four top-level
//! commands, and deterministic report rendering.

pub mod commands;
pub mod report;
pub mod scenario;

pub use commands::{
    cmd_fit, cmd_oracle, cmd_simulate, cmd_sweep, parse_widths, virtual_propagation_distance,
    FitBranch, FitOutput, OracleOutput, SimulateOutput, SweepOutput,
};
pub use scenario::{
    canonical_form, canonical_hash, load_scenario, save_scenario, scenario_from_toml,
    scenario_to_toml, Preset, Scenario,
};
