//! Config-driven experiment pipelines: one flat JSON file per run, artifacts
//! written as summary.json, samples.csv and plot.csv.

mod config;
mod example;
mod runner;

pub use config::{
    CountingParams, CoverParams, CtDecayParams, Example101Params, Experiment, ExperimentConfig, GoodBallParams,
    GraphSource, GriParams, IlseConfig, MsaStepParams, Region, SpectrumParams, StepInterval, ValidateParams, VertexRef,
    WegnerParams,
};
pub use example::{reproduce_example_10_1, Example101Report, PendantRow, EXAMPLE_TOL};
pub use runner::{run, run_to_dir, write_table, RunOutput};

/// Worker-count environment variable; the only setting read from the environment.
pub const WORKERS_ENV: &str = "QGRAPH_WORKERS";

/// Sizes the global thread pool from `--workers`, else the environment, else
/// rayon's default. Results do not depend on the count.
pub fn configure_workers(flag: Option<usize>) -> crate::Result<usize> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| crate::Error::Config(format!("{WORKERS_ENV} = {s:?} is not a count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(crate::Error::Config("worker count must be positive".into()));
        }
        // a second call keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}
