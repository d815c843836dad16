//! Config ingestion and subcommands of the `swipt-mac` binary.

// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

pub use commands::{cmd_coop, cmd_region, cmd_sumrate_sweep, cmd_verify, region};
pub use config::{
    ingest_config, parse_config, parse_value, preset_names, Channel, ConfigError, CoopMethod,
    RunConfig, Scenario, Sweep, DEFAULT_SCAN_POINTS,
};
