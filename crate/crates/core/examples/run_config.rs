//! Drives the experiment pipelines from a JSON config, as the binary does.
//!
//! ```bash
//! cargo run --example run_config -- crates/core/examples/configs/mp_freezing.json gap-scan
//! ```

use std::path::PathBuf;

use clap::ValueEnum;
use thermoform::cli::{run, Command, ExperimentConfig};

fn main() -> thermoform::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/doubling_cos.json")));
    let command = args
        .next()
        .map(|s| Command::from_str(&s, true).expect("unknown command"))
        .unwrap_or(Command::OracleCheck);

    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.out = std::env::temp_dir().join("thermoform-example");
    let outcome = run(command, &cfg)?;
    for artifact in &outcome.artifacts {
        println!("{}", artifact.display());
    }
    println!("converged: {}", outcome.converged);
    Ok(())
}
