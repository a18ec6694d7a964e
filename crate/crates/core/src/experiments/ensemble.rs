use serde::{Deserialize, Serialize};

use crate::abm::{run_simulation, SimConfig, SimOutput};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// A batch of independent runs of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub base: SimConfig,
    pub runs: usize,
    /// Run `k` is seeded with `derive_seed(seed_base, k)`.
    pub seed_base: u64,
    /// Maximum concurrent runs; 0 lets the thread pool decide.
    pub parallelism: usize,
}

impl EnsembleSpec {
    pub fn new(base: SimConfig, runs: usize, seed_base: u64) -> Self {
        Self {
            base,
            runs,
            seed_base,
            parallelism: 0,
        }
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn run_config(&self, index: usize) -> SimConfig {
        SimConfig {
            seed: derive_seed(self.seed_base, index as u64),
            ..self.base.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::domain("EnsembleSpec", "runs must be at least 1"));
        }
        self.base.validate().map(|_| ())
    }
}

fn run_one<T, F>(spec: &EnsembleSpec, index: usize, reduce: &F) -> Result<T>
where
    F: Fn(usize, SimOutput) -> T,
{
    let output = run_simulation(&spec.run_config(index)).map_err(|e| Error::Run {
        index,
        source: Box::new(e),
    })?;
    Ok(reduce(index, output))
}

/// Runs every member on the calling thread, in index order.
pub fn run_ensemble_sequential_with<T, F>(spec: &EnsembleSpec, reduce: F) -> Result<Vec<T>>
where
    F: Fn(usize, SimOutput) -> T,
{
    spec.validate()?;
    (0..spec.runs).map(|k| run_one(spec, k, &reduce)).collect()
}

/// Runs every member and maps its output through `reduce`. Results come back
/// in run-index order whatever the completion order.
#[cfg(feature = "parallel")]
pub fn run_ensemble_with<T, F>(spec: &EnsembleSpec, reduce: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, SimOutput) -> T + Sync,
{
    use rayon::prelude::*;

    spec.validate()?;
    if spec.parallelism == 1 || spec.runs == 1 {
        return run_ensemble_sequential_with(spec, reduce);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism)
        .build()
        .map_err(|e| Error::domain("run_ensemble", format!("cannot start thread pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| {
        (0..spec.runs)
            .into_par_iter()
            .map(|k| run_one(spec, k, &reduce))
            .collect()
    });
    results.into_iter().collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_ensemble_with<T, F>(spec: &EnsembleSpec, reduce: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, SimOutput) -> T + Sync,
{
    run_ensemble_sequential_with(spec, reduce)
}

pub fn run_ensemble(spec: &EnsembleSpec) -> Result<Vec<SimOutput>> {
    run_ensemble_with(spec, |_, out| out)
}
