//! Regeneration structure of the tree walk.
//!
//! A time `t >= 1` is a regeneration time when `|S_t|` is a level never
//! attained before `t` and the level `|S_{t-1}|` is never attained after `t`.
//! The second clause quantifies over the whole future, so detection runs
//! offline over a finished level sequence. The final index of the sequence has
//! no observed future at all and is never reported; when it is itself a new
//! record level the record is flagged `censored`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::draw_tree_move;
use crate::rng::walk_stream;
use crate::scalar::compensated_sum;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegenerationRecord {
    /// Regeneration times `tau_1 < tau_2 < ...`.
    pub taus: Vec<usize>,
    /// `theta_1 = tau_1`, `theta_k = tau_k - tau_{k-1}`.
    pub epochs: Vec<usize>,
    /// The run ended on a fresh record level, so the last reported
    /// regeneration relies on the shortest stretch of observed future.
    pub censored: bool,
}

impl RegenerationRecord {
    /// Epochs with the final one dropped when the record is censored.
    pub fn usable_epochs(&self) -> &[usize] {
        if self.censored && !self.epochs.is_empty() {
            &self.epochs[..self.epochs.len() - 1]
        } else {
            &self.epochs
        }
    }

    /// Index `k` of the epoch containing time `t`, where epoch `k` spans
    /// `[tau_k, tau_{k+1})` with `tau_0 = 0`.
    pub fn epoch_of(&self, t: usize) -> usize {
        self.taus.partition_point(|&tau| tau <= t)
    }
}

/// Regeneration times of a tree-walk level sequence.
pub fn detect_regenerations(levels: &[u32]) -> Result<RegenerationRecord> {
    if levels.len() < 2 {
        return Err(Error::ShortLevels(levels.len()));
    }
    let last = levels.len() - 1;
    // suffix_min[k] = min(levels[k..])
    let mut suffix_min = levels.to_vec();
    for k in (0..last).rev() {
        suffix_min[k] = suffix_min[k].min(suffix_min[k + 1]);
    }
    let mut taus = Vec::new();
    let mut censored = false;
    let mut record = levels[0];
    for t in 1..=last {
        let fresh = levels[t] > record;
        if fresh {
            record = levels[t];
            if t == last {
                censored = true;
            } else if suffix_min[t] > levels[t - 1] {
                taus.push(t);
            }
        }
    }
    let epochs = taus
        .iter()
        .scan(0usize, |prev, &tau| {
            let e = tau - *prev;
            *prev = tau;
            Some(e)
        })
        .collect();
    Ok(RegenerationRecord {
        taus,
        epochs,
        censored,
    })
}

/// Lower bound `(1/3) log((d+1)/3) + 1/3 - 1/(d+1)` on the exponential-moment
/// exponent of the regeneration epochs.
pub fn s_d_lower_bound(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "d must be at least 2, got {d}"
        )));
    }
    let d = d as f64;
    Ok(((d + 1.0) / 3.0).ln() / 3.0 + 1.0 / 3.0 - 1.0 / (d + 1.0))
}

/// The operative `lambda_d`: half of the proved lower bound on `s_d`.
///
/// Zero for `d = 2`, so thresholds of the form `(4 / lambda_d) log n` need
/// `d >= 3`.
pub fn lambda_d(d: usize) -> Result<f64> {
    Ok(s_d_lower_bound(d)? / 2.0)
}

/// Probability that the walk started at the root never returns: `(d-1)/d`.
pub fn escape_probability(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "d must be at least 2, got {d}"
        )));
    }
    Ok((d as f64 - 1.0) / d as f64)
}

/// Sample mean of `exp(lambda * theta)`.
pub fn empirical_epoch_mgf(epochs: &[usize], lambda: f64) -> Result<f64> {
    if epochs.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let total = compensated_sum(epochs.iter().map(|&e| (lambda * e as f64).exp()));
    Ok(total / epochs.len() as f64)
}

/// `(k, count)` rows of the epoch-length histogram, sorted by `k`.
pub fn epoch_histogram(epochs: &[usize]) -> Vec<(usize, u64)> {
    let mut h = BTreeMap::new();
    for &e in epochs {
        *h.entry(e).or_insert(0u64) += 1;
    }
    h.into_iter().collect()
}

/// Empirical survival function `P(theta >= k)` for each `k` in `ks`.
pub fn epoch_survival(epochs: &[usize], ks: &[usize]) -> Vec<(usize, u64)> {
    ks.iter()
        .map(|&k| (k, epochs.iter().filter(|&&e| e >= k).count() as u64))
        .collect()
}

/// Check that vertex sets visited during distinct epochs are disjoint.
/// `sites[t]` is the site index of `S_t`.
pub fn epochs_disjoint(sites: &[u32], record: &RegenerationRecord) -> bool {
    let mut owner: Vec<Option<usize>> = Vec::new();
    for (t, &s) in sites.iter().enumerate() {
        let k = record.epoch_of(t);
        let i = s as usize;
        if i >= owner.len() {
            owner.resize(i + 1, None);
        }
        match owner[i] {
            None => owner[i] = Some(k),
            Some(prev) if prev != k => return false,
            _ => {}
        }
    }
    true
}

/// Whether the level chain started at the root comes back to it within
/// `horizon` steps.
pub fn returns_to_root<R: Rng + ?Sized>(d: usize, horizon: usize, rng: &mut R) -> bool {
    let mut level = 0u32;
    for _ in 0..horizon {
        if draw_tree_move(level == 0, d, rng) == 0 {
            level -= 1;
            if level == 0 {
                return true;
            }
        } else {
            level += 1;
        }
    }
    false
}

/// Number of replicas (out of `replicas`) that never return to the root
/// within `horizon` steps. Replica `r` uses walk stream `r` of `seed`.
pub fn escape_count(d: usize, horizon: usize, replicas: u64, seed: u64) -> Result<u64> {
    escape_probability(d)?;
    Ok((0..replicas)
        .filter(|&r| !returns_to_root(d, horizon, &mut walk_stream(seed, r)))
        .count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{run_walk, Graph};

    #[test]
    fn first_regeneration_follows_the_definition() {
        // 0,1,2,1,2,3,4,5,6: level 0 is never revisited after time 1, so
        // tau_1 = 1; the next regeneration is 5 (level 2 last seen at time 4).
        let levels = [0, 1, 2, 1, 2, 3, 4, 5, 6];
        let r = detect_regenerations(&levels).unwrap();
        assert_eq!(r.taus, vec![1, 5, 6, 7]);
        assert_eq!(r.epochs, vec![1, 4, 1, 1]);
        assert!(r.censored);
        assert_eq!(r.epochs.iter().sum::<usize>(), *r.taus.last().unwrap());
    }

    #[test]
    fn return_to_root_delays_first_regeneration() {
        let levels = [0, 1, 0, 1, 2, 1, 2, 3, 4];
        let r = detect_regenerations(&levels).unwrap();
        assert_eq!(r.taus, vec![7]);
        assert_eq!(r.epochs, vec![7]);
    }

    #[test]
    fn strictly_increasing() {
        let levels: Vec<u32> = (0..=10).collect();
        let r = detect_regenerations(&levels).unwrap();
        assert_eq!(r.taus, (1..10).collect::<Vec<_>>());
        assert!(r.censored);
        assert_eq!(r.usable_epochs().len(), 8);
    }

    #[test]
    fn short_input_rejected() {
        assert!(detect_regenerations(&[0]).is_err());
        assert!(detect_regenerations(&[]).is_err());
    }

    #[test]
    fn constants() {
        assert_eq!(s_d_lower_bound(2).unwrap(), 0.0);
        let s8 = s_d_lower_bound(8).unwrap();
        assert!((s8 - (3f64.ln() / 3.0 + 1.0 / 3.0 - 1.0 / 9.0)).abs() < 1e-15);
        assert!((s8 - 0.5885).abs() < 1e-4);
        assert_eq!(lambda_d(8).unwrap(), s8 / 2.0);
        let mut prev = s_d_lower_bound(2).unwrap();
        for d in 3..200 {
            let s = s_d_lower_bound(d).unwrap();
            assert!(s > prev);
            prev = s;
        }
        assert!(s_d_lower_bound(1_000_000_000).unwrap() > 6.0);
        assert!(s_d_lower_bound(1).is_err());
        assert_eq!(escape_probability(2).unwrap(), 0.5);
        assert!((escape_probability(10).unwrap() - 0.9).abs() < 1e-15);
        assert!(escape_probability(1).is_err());
    }

    #[test]
    fn mgf_basics() {
        assert_eq!(empirical_epoch_mgf(&[1, 5, 9], 0.0).unwrap(), 1.0);
        let v = empirical_epoch_mgf(&[3, 3, 3], 0.2).unwrap();
        assert!((v - (0.6f64).exp()).abs() < 1e-14);
        assert_eq!(empirical_epoch_mgf(&[], 0.1), Err(Error::EmptySample));
    }

    #[test]
    fn regeneration_invariants_on_walks() {
        for seed in 0..20 {
            let t = run_walk(Graph::Tree { d: 3 }, 4000, seed).unwrap();
            let levels = t.levels();
            let r = detect_regenerations(levels).unwrap();
            assert!(r.taus.windows(2).all(|w| w[0] < w[1]));
            assert!(r.taus.windows(2).all(|w| levels[w[0]] < levels[w[1]]));
            assert!(r.epochs.iter().all(|&e| e > 0));
            for &tau in &r.taus {
                assert!(levels[..tau].iter().all(|&l| l < levels[tau]));
                assert!(levels[tau + 1..].iter().all(|&l| l != levels[tau - 1]));
            }
            let (_, sites) = t.sites();
            assert!(epochs_disjoint(&sites, &r));
        }
    }

    #[test]
    fn histogram_counts() {
        let h = epoch_histogram(&[1, 1, 4, 2, 1]);
        assert_eq!(h, vec![(1, 3), (2, 1), (4, 1)]);
        assert_eq!(
            epoch_survival(&[1, 1, 4, 2, 1], &[2, 5]),
            vec![(2, 2), (5, 0)]
        );
    }
}
