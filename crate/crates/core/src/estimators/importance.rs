//! Conditional tail `P(T_n >= a | walk)` by plain sampling and by exponential
//! tilting.
//!
//! Given the walk, `T_n = sum_v l(v) xi(v)` is a sum of independent terms.
//! Tilting `xi(v)` by `theta * l(v)` gives the likelihood ratio
//! `exp(-theta T + sum_v psi(theta l(v)))`.

use crate::error::{Error, Result};
use crate::estimators::ci::MeanEstimate;
use crate::estimators::tail::TailEstimate;
use crate::local_time::LocalTimeLedger;
use crate::replica::map_replicas;
use crate::rng::{purpose_stream, Purpose};
use crate::scalar::CompensatedSum;
use crate::scenery::SceneryDistribution;

/// Per-replica values `1{T >= a} * weight` of the tilted estimator.
pub fn is_samples(
    local_times: &[u64],
    dist: &SceneryDistribution,
    a: f64,
    theta: f64,
    replicas: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    dist.validate()?;
    let tilts: Vec<f64> = local_times.iter().map(|&l| theta * l as f64).collect();
    let base = tilts
        .iter()
        .map(|&s| dist.log_mgf(s))
        .collect::<Result<CompensatedSum<f64>>>()?
        .value();
    map_replicas(
        replicas,
        None,
        || (),
        |_, r| {
            let mut rng = purpose_stream(seed, Purpose::Conditional, r);
            let mut t = CompensatedSum::new();
            for (&l, &s) in local_times.iter().zip(&tilts) {
                t.add(l as f64 * dist.sample_tilted(s, &mut rng)?);
            }
            let t = t.value();
            Ok(if t >= a {
                (base - theta * t).exp()
            } else {
                0.0
            })
        },
    )
}

/// Importance-sampling estimate of `P(T_n >= a | walk)` with tilt `theta`.
pub fn tail_is_conditional(
    ledger: &LocalTimeLedger,
    dist: &SceneryDistribution,
    a: f64,
    theta: f64,
    replicas: u64,
    seed: u64,
) -> Result<TailEstimate> {
    let xs = is_samples(&ledger.local_times(), dist, a, theta, replicas, seed)?;
    let m = MeanEstimate::from_samples(&xs)?;
    Ok(TailEstimate::from_mean(
        a,
        m.mean,
        m.std_error,
        replicas,
        "tilted",
    ))
}

/// Plain estimate of `P(T_n >= a | walk)` on the same streams as
/// [`tail_is_conditional`].
pub fn tail_mc_conditional(
    ledger: &LocalTimeLedger,
    dist: &SceneryDistribution,
    a: f64,
    replicas: u64,
    seed: u64,
) -> Result<TailEstimate> {
    dist.validate()?;
    let lts = ledger.local_times();
    let hits = map_replicas(
        replicas,
        None,
        || (),
        |_, r| {
            let mut rng = purpose_stream(seed, Purpose::Conditional, r);
            let mut t = CompensatedSum::new();
            for &l in &lts {
                t.add(l as f64 * dist.sample(&mut rng));
            }
            Ok(t.value() >= a)
        },
    )?
    .into_iter()
    .filter(|&h| h)
    .count() as u64;
    Ok(TailEstimate::from_hits(a, hits, replicas, None))
}

/// Tilt `theta >= 0` putting the tilted mean of `T_n` at `a`:
/// `sum_v l(v) psi'(theta l(v)) = a`.
pub fn optimal_tilt(ledger: &LocalTimeLedger, dist: &SceneryDistribution, a: f64) -> Result<f64> {
    dist.validate()?;
    if a <= 0.0 {
        return Ok(0.0);
    }
    let lts = ledger.local_times();
    let mean = |theta: f64| -> Result<f64> {
        lts.iter()
            .map(|&l| Ok(l as f64 * dist.tilted_mean(theta * l as f64)?))
            .sum()
    };
    let mut hi = 1e-3;
    let mut doublings = 0;
    while mean(hi)? < a {
        hi *= 2.0;
        doublings += 1;
        if doublings > 80 {
            return Err(Error::NotConverged(format!(
                "no tilt reaches mean {a}; the level exceeds the support"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean(mid)? < a {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
