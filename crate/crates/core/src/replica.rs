//! Replica fan-out.
//!
//! Replica `r` of a run with seed `s` draws its walk from stream `r` of `s`
//! and its scenery from `scenery_seed(s, r)`, so results do not depend on how
//! replicas are spread over threads. Workers keep their ledger and scenery
//! buffers between replicas.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::local_time::{sample_ledger, LocalTimeLedger};
use crate::rng::{scenery_seed, walk_stream};
use crate::scalar::{CompensatedSum, Scalar};
use crate::scenery::{SceneryAssignment, SceneryDistribution};
use crate::stats::{compute_summary, RwrsSummary};

/// Run `f(worker_state, r)` for `r in 0..replicas`, in replica order.
/// `threads = None` uses rayon's global pool.
pub fn map_replicas<T, W, I, F>(
    replicas: u64,
    threads: Option<usize>,
    init: I,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    I: Fn() -> W + Sync + Send,
    F: Fn(&mut W, u64) -> Result<T> + Sync + Send,
{
    let job = || -> Result<Vec<T>> {
        (0..replicas)
            .into_par_iter()
            .map_init(&init, |w, r| f(w, r))
            .collect()
    };
    match threads {
        None => job(),
        Some(0) => Err(Error::InvalidParameter("threads must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(job),
    }
}

/// Per-worker buffers for walk-plus-scenery replicas.
#[derive(Clone, Debug)]
pub struct Workspace {
    pub ledger: LocalTimeLedger,
    pub scenery: SceneryAssignment<f64>,
}

impl Workspace {
    pub fn new(graph: Graph, dist: &SceneryDistribution) -> Self {
        Workspace {
            ledger: LocalTimeLedger::new(graph),
            scenery: SceneryAssignment::from_values(dist.clone(), 0, Vec::new()),
        }
    }

    /// Fill the buffers with replica `r` and return its summary.
    pub fn run(&mut self, graph: Graph, n: usize, seed: u64, r: u64) -> Result<RwrsSummary<f64>> {
        sample_ledger(graph, n, &mut walk_stream(seed, r), &mut self.ledger)?;
        self.scenery.resample(&self.ledger, scenery_seed(seed, r));
        compute_summary(&self.ledger, &self.scenery)
    }
}

/// Summaries of replicas `0..replicas`.
pub fn simulate_summaries(
    graph: Graph,
    dist: &SceneryDistribution,
    n: usize,
    replicas: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<RwrsSummary<f64>>> {
    graph.validate()?;
    dist.validate()?;
    map_replicas(
        replicas,
        threads,
        || Workspace::new(graph, dist),
        |ws, r| ws.run(graph, n, seed, r),
    )
}

/// Order-fixed compensated mean.
pub fn mean<S: Scalar>(xs: impl IntoIterator<Item = S>) -> Result<S> {
    let mut acc = CompensatedSum::new();
    let mut k = 0u64;
    for x in xs {
        acc.add(x);
        k += 1;
    }
    if k == 0 {
        return Err(Error::EmptySample);
    }
    Ok(acc.value() / S::from_count(k))
}
