//! Exact tail probabilities by enumerating every scenery assignment of a
//! fixed walk.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local_time::LocalTimeLedger;
use crate::scalar::Scalar;
use crate::scenery::SceneryDistribution;

/// Largest number of assignments the oracle will enumerate.
pub const MAX_ASSIGNMENTS: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult<S> {
    /// `P(W_n >= y | walk)`; assignments with `V_n^2 = 0` do not count.
    pub p_w: S,
    /// `P(T_n >= a | walk)`.
    pub p_t: S,
    pub assignments: u64,
}

/// `W >= y` decided without square roots, given `T`, `V^2`, `n + 1` and
/// `L_{n,2}^2`.
fn w_at_least<S: Scalar>(t: &S, v2: &S, mass: &S, silt2: &S, y: &S) -> bool {
    if !(*v2 > S::zero()) {
        return false;
    }
    let lhs = t.clone() * t.clone() * mass.clone();
    let rhs = y.clone() * y.clone() * v2.clone() * silt2.clone();
    if *y > S::zero() {
        *t > S::zero() && lhs >= rhs
    } else {
        *t >= S::zero() || lhs <= rhs
    }
}

/// Enumerate all `k^r` assignments of the atoms `(value, prob)` to the `r`
/// local times.
pub fn enumerate_exact<S: Scalar>(
    local_times: &[u64],
    atoms: &[(S, S)],
    y: &S,
    a: &S,
) -> Result<OracleResult<S>> {
    if atoms.is_empty() {
        return Err(Error::InvalidParameter("no support atoms".into()));
    }
    let r = local_times.len();
    let size = (atoms.len() as u128)
        .checked_pow(r as u32)
        .unwrap_or(u128::MAX);
    if size > MAX_ASSIGNMENTS {
        return Err(Error::InstanceTooLarge(size));
    }
    let mass = S::from_count(local_times.iter().sum());
    let silt2 = S::from_count(local_times.iter().map(|l| l * l).sum());
    let lts: Vec<S> = local_times.iter().map(|&l| S::from_count(l)).collect();
    let k = atoms.len();
    let mut digits = vec![0usize; r];
    let mut p_w = S::zero();
    let mut p_t = S::zero();
    for _ in 0..size {
        let mut t = S::zero();
        let mut v2 = S::zero();
        let mut weight = S::one();
        for (l, &j) in lts.iter().zip(&digits) {
            let (x, p) = &atoms[j];
            let lx = l.clone() * x.clone();
            v2 = v2 + lx.clone() * x.clone();
            t = t + lx;
            weight = weight * p.clone();
        }
        if t >= *a {
            p_t = p_t + weight.clone();
        }
        if w_at_least(&t, &v2, &mass, &silt2, y) {
            p_w = p_w + weight;
        }
        for dgt in digits.iter_mut() {
            *dgt += 1;
            if *dgt < k {
                break;
            }
            *dgt = 0;
        }
    }
    Ok(OracleResult {
        p_w,
        p_t,
        assignments: size as u64,
    })
}

/// Oracle on a ledger with a finitely supported scenery law, in `f64`.
pub fn enumerate_oracle(
    ledger: &LocalTimeLedger,
    dist: &SceneryDistribution,
    y: f64,
    a: f64,
) -> Result<OracleResult<f64>> {
    let atoms = dist
        .finite_support()
        .ok_or_else(|| Error::InvalidParameter(format!("{dist} does not have finite support")))?;
    enumerate_exact(&ledger.local_times(), &atoms, &y, &a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{FromPrimitive, One};

    fn rademacher_exact() -> Vec<(BigRational, BigRational)> {
        let half = BigRational::new(1.into(), 2.into());
        vec![
            (-BigRational::one(), half.clone()),
            (BigRational::one(), half),
        ]
    }

    #[test]
    fn two_unit_sites() {
        let atoms = rademacher_exact();
        let two = BigRational::from_i64(2).unwrap();
        let r = enumerate_exact(&[1, 1], &atoms, &BigRational::from_i64(0).unwrap(), &two).unwrap();
        assert_eq!(r.p_t, BigRational::new(1.into(), 4.into()));
        let r = enumerate_exact(&[1, 1], &atoms, &two, &(-two.clone())).unwrap();
        assert_eq!(r.p_t, BigRational::one());
        assert_eq!(r.assignments, 4);
    }

    #[test]
    fn w_event_matches_float_definition() {
        // l = (2, 1): T in {-3, -1, 1, 3}, V^2 = 3, silt2 = 5, n + 1 = 3
        let atoms = vec![(-1.0, 0.5), (1.0, 0.5)];
        let r = enumerate_exact(&[2, 1], &atoms, &1.2, &0.0).unwrap();
        // W = T / sqrt(5): only T = 3 gives W >= 1.2
        assert_eq!(r.p_w, 0.25);
        let r = enumerate_exact(&[2, 1], &atoms, &-0.5, &0.0).unwrap();
        assert_eq!(r.p_w, 0.75);
    }

    #[test]
    fn too_large_rejected() {
        let atoms = vec![(-1.0, 0.5), (1.0, 0.5)];
        let lts = vec![1u64; 25];
        assert!(matches!(
            enumerate_exact(&lts, &atoms, &0.0, &0.0),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn continuous_law_rejected() {
        let l = LocalTimeLedger::new(crate::graph::Graph::Tree { d: 2 });
        let g = SceneryDistribution::Gaussian { sigma: 1.0 };
        assert!(enumerate_oracle(&l, &g, 0.0, 0.0).is_err());
    }
}
