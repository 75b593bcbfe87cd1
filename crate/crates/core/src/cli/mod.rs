//! JSON experiment configs and the pipelines behind the `thermoform` binary.
//!
//! Every artifact is written through a temporary file and renamed into
//! place. CSV numbers use 17 significant digits in lowercase e-notation
//! with LF line endings, and per-`t` work is reduced in grid order, so a
//! config produces byte-identical CSV for any worker count.

mod config;
mod output;
mod run;

pub use config::{
    BaseSpec, ExperimentConfig, FlattenSettings, MapSpec, OnsetSettings, OracleSettings, PotentialSpec, TRange,
    ToleranceOverrides,
};
pub use output::{write_atomic, write_json};
pub use run::{exit_code, run, Command, Overrides, RunOutcome};
