//! Plain Monte Carlo estimates of `P(W_n >= y)` and the rate constant of the
//! tree upper bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ci::{wilson, Z95};
use crate::graph::Graph;
use crate::replica::simulate_summaries;
use crate::scenery::SceneryDistribution;
use crate::stats::RwrsSummary;

/// Minimum replica count accepted by [`tail_mc`].
pub const MIN_TAIL_REPLICAS: u64 = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub y: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicas: u64,
    /// Replicas in the event; `None` for weighted estimators.
    pub hits: Option<u64>,
    pub std_error: f64,
    /// `y^-2 ln p_hat`; NaN when `p_hat = 0`.
    pub rate: f64,
    /// `y^(-2d/(d+2)) (ln n)^(-2/(d+2)) ln p_hat` on lattices; NaN otherwise.
    pub lattice_rate: f64,
    /// No replica hit the event, so no rate is reported.
    pub insufficient: bool,
    pub method: String,
}

fn log_or_nan(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NAN
    }
}

/// `y^(-2d/(d+2)) (ln n)^(-2/(d+2)) ln p`.
pub fn lattice_rate(p: f64, y: f64, n: u64, d: usize) -> f64 {
    let d = d as f64;
    log_or_nan(p) * y.powf(-2.0 * d / (d + 2.0)) * (n as f64).ln().powf(-2.0 / (d + 2.0))
}

impl TailEstimate {
    /// Binomial estimate with a Wilson interval. `lattice` carries `(n, d)`
    /// when the lattice rate applies.
    pub fn from_hits(y: f64, hits: u64, replicas: u64, lattice: Option<(u64, usize)>) -> Self {
        let p = if replicas == 0 {
            0.0
        } else {
            hits as f64 / replicas as f64
        };
        let (ci_low, ci_high) = wilson(hits, replicas, Z95);
        TailEstimate {
            y,
            p_hat: p,
            ci_low,
            ci_high,
            replicas,
            hits: Some(hits),
            std_error: (p * (1.0 - p) / replicas.max(1) as f64).sqrt(),
            rate: log_or_nan(p) / (y * y),
            lattice_rate: lattice.map_or(f64::NAN, |(n, d)| lattice_rate(p, y, n, d)),
            insufficient: hits == 0,
            method: "plain".into(),
        }
    }

    /// Weighted estimate `mean +- z * std_error`, clipped to `[0, 1]`.
    pub fn from_mean(y: f64, mean: f64, std_error: f64, replicas: u64, method: &str) -> Self {
        TailEstimate {
            y,
            p_hat: mean,
            ci_low: (mean - Z95 * std_error).clamp(0.0, 1.0).min(mean),
            ci_high: (mean + Z95 * std_error).clamp(0.0, 1.0).max(mean),
            replicas,
            hits: None,
            std_error,
            rate: log_or_nan(mean) / (y * y),
            lattice_rate: f64::NAN,
            insufficient: !(mean > 0.0),
            method: method.into(),
        }
    }
}

/// Tail estimates at every `y` from one shared set of replicas. Replicas
/// with undefined `W_n` count as misses.
pub fn tail_from_summaries(
    summaries: &[RwrsSummary<f64>],
    ys: &[f64],
    graph: Graph,
) -> Vec<TailEstimate> {
    let replicas = summaries.len() as u64;
    let lattice = match graph {
        Graph::Lattice { d } => summaries.first().map(|s| (s.n, d)),
        Graph::Tree { .. } => None,
    };
    ys.iter()
        .map(|&y| {
            let hits = summaries
                .iter()
                .filter(|s| s.w.is_some_and(|w| w >= y))
                .count() as u64;
            TailEstimate::from_hits(y, hits, replicas, lattice)
        })
        .collect()
}

/// `P(W_n >= y)` for each `y`, with common random numbers across `y`.
pub fn tail_mc_multi(
    graph: Graph,
    dist: &SceneryDistribution,
    n: usize,
    ys: &[f64],
    replicas: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<TailEstimate>> {
    if replicas < MIN_TAIL_REPLICAS {
        return Err(Error::InvalidParameter(format!(
            "tail estimation needs at least {MIN_TAIL_REPLICAS} replicas, got {replicas}"
        )));
    }
    let summaries = simulate_summaries(graph, dist, n, replicas, seed, threads)?;
    Ok(tail_from_summaries(&summaries, ys, graph))
}

/// `P(W_n >= y)` by plain Monte Carlo.
pub fn tail_mc(
    graph: Graph,
    dist: &SceneryDistribution,
    n: usize,
    y: f64,
    replicas: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<TailEstimate> {
    Ok(tail_mc_multi(graph, dist, n, &[y], replicas, seed, threads)?.remove(0))
}

/// `(1 - sqrt(24/lambda))^2` without a domain check.
pub fn c_d_formula(lambda: f64) -> f64 {
    let e = 1.0 - (24.0 / lambda).sqrt();
    e * e
}

/// Rate constant of the tree upper bound; only defined for `lambda > 24`.
pub fn c_d(lambda: f64) -> Result<f64> {
    if !(lambda > 24.0) {
        return Err(Error::NoEffectiveConstant { lambda });
    }
    Ok(c_d_formula(lambda))
}
