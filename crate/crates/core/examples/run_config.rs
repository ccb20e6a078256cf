//! Runs any experiment config and writes its outputs, like `qgraph run`.
use std::path::PathBuf;

use qgraph::experiment::{run_to_dir, ExperimentConfig};

fn main() -> qgraph::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "configs/params-validate.json".into());
    let cfg = ExperimentConfig::load(&path)?;
    let out = run_to_dir(&cfg, None)?;
    println!("{}", serde_json::to_string_pretty(&out.summary)?);
    Ok(())
}
