//! Principal eigenvalue of the simple random walk killed on leaving the
//! Euclidean ball `{z in Z^d : |z| <= R}`.
//!
//! The restricted kernel `P` is symmetric and bipartite, so its spectrum is
//! symmetric about 0. Power iteration runs on the lazy kernel `(I + P) / 2`,
//! whose top eigenvalue is simple and separated; the Rayleigh quotient of `P`
//! at the iterate gives `lambda_R`.

use num_traits::Float;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_RADIUS: usize = 12;
pub const MAX_STATES: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfinementResult<F> {
    pub d: usize,
    pub radius: usize,
    pub states: usize,
    pub lambda: F,
    /// `-ln lambda`, the per-step decay rate of the confinement probability.
    pub decay: F,
    pub iterations: usize,
    /// `|P x - lambda x|` at the final unit iterate.
    pub residual: F,
}

/// Lattice points of the ball and, for each, the indices of its in-ball
/// neighbors.
fn ball(d: usize, radius: usize) -> Result<Vec<Vec<u32>>> {
    let r = radius as i64;
    let side = 2 * radius + 1;
    let cube = (side as f64).powi(d as i32);
    if cube > 1e8 {
        return Err(Error::StateSpaceTooLarge(format!(
            "bounding cube of the radius-{radius} ball in dimension {d} has {cube:.3e} points"
        )));
    }
    let mut points: Vec<Vec<i32>> = Vec::new();
    let mut x = vec![-r; d];
    'outer: loop {
        if x.iter().map(|c| c * c).sum::<i64>() <= r * r {
            points.push(x.iter().map(|&c| c as i32).collect());
            if points.len() > MAX_STATES {
                return Err(Error::StateSpaceTooLarge(format!(
                    "more than {MAX_STATES} states"
                )));
            }
        }
        for c in x.iter_mut() {
            *c += 1;
            if *c <= r {
                continue 'outer;
            }
            *c = -r;
        }
        break;
    }
    let index: FxHashMap<&[i32], u32> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i as u32))
        .collect();
    let mut y = vec![0i32; d];
    Ok(points
        .iter()
        .map(|p| {
            let mut nb = Vec::with_capacity(2 * d);
            for k in 0..d {
                for s in [1, -1] {
                    y.copy_from_slice(p);
                    y[k] += s;
                    if let Some(&j) = index.get(y.as_slice()) {
                        nb.push(j);
                    }
                }
            }
            nb
        })
        .collect())
}

fn apply<F: Float>(nbrs: &[Vec<u32>], w: F, x: &[F], out: &mut [F]) {
    for (o, nb) in out.iter_mut().zip(nbrs) {
        *o = nb.iter().fold(F::zero(), |acc, &j| acc + x[j as usize]) * w;
    }
}

fn norm<F: Float>(x: &[F]) -> F {
    x.iter().fold(F::zero(), |a, &v| a + v * v).sqrt()
}

/// Power iteration in scalar type `F`, stopping once the residual drops
/// below `tol`.
pub fn confinement_eigenvalue<F: Float>(
    d: usize,
    radius: usize,
    tol: F,
    max_iter: usize,
) -> Result<ConfinementResult<F>> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if radius > MAX_RADIUS {
        return Err(Error::StateSpaceTooLarge(format!(
            "radius {radius} exceeds the cap {MAX_RADIUS}"
        )));
    }
    let nbrs = ball(d, radius)?;
    let m = nbrs.len();
    let w = F::one() / F::from(2 * d).expect("small integer");
    let half = F::from(0.5).expect("representable");
    let mut x = vec![F::one() / F::from(m).expect("small integer").sqrt(); m];
    let mut px = vec![F::zero(); m];
    let mut lambda = F::zero();
    let mut residual = F::infinity();
    for it in 1..=max_iter {
        apply(&nbrs, w, &x, &mut px);
        lambda = x.iter().zip(&px).fold(F::zero(), |a, (&u, &v)| a + u * v);
        residual = x
            .iter()
            .zip(&px)
            .fold(F::zero(), |a, (&u, &v)| {
                let e = v - lambda * u;
                a + e * e
            })
            .sqrt();
        if residual <= tol {
            return Ok(ConfinementResult {
                d,
                radius,
                states: m,
                lambda,
                decay: -lambda.ln(),
                iterations: it,
                residual,
            });
        }
        for (u, &v) in x.iter_mut().zip(&px) {
            *u = half * (*u + v);
        }
        let s = norm(&x);
        for u in x.iter_mut() {
            *u = *u / s;
        }
    }
    Err(Error::NotConverged(format!(
        "power iteration stopped at residual {:?} with lambda {:?}",
        residual.to_f64(),
        lambda.to_f64()
    )))
}

/// `lambda_R` in `f64` with residual below `1e-11`.
pub fn confinement_rate(d: usize, radius: usize) -> Result<ConfinementResult<f64>> {
    confinement_eigenvalue(d, radius, 1e-11, 2_000_000)
}
