//! Worker-pool fan-out of Monte Carlo batches.

use loracap_core::simulator::{self, ThroughputResult};
use loracap_core::{Model, Orthogonality};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Build a pool with `workers` threads (0 = rayon's default).
pub fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

/// Same batches and reduction order as [`simulator::estimate`], so the
/// result is bit-identical for any number of workers.
pub fn estimate(
    model: &Model,
    nodes: usize,
    mode: Orthogonality,
    trials: u64,
    seed: u64,
) -> Result<ThroughputResult> {
    if trials == 0 || nodes == 0 {
        return simulator::estimate(model, nodes, mode, trials, seed).map_err(CliError::from_core);
    }
    let batches = (0..simulator::batch_count(trials))
        .into_par_iter()
        .map(|b| simulator::run_batch(model, nodes, mode, seed, b, trials))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(CliError::from_core)?;
    Ok(ThroughputResult::from_accumulator(&simulator::reduce_batches(batches), seed))
}
