//! Green's function at the origin of the simple random walk on `Z^d`.

use libm::tgamma as gamma;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ci::MeanEstimate;
use crate::graph::draw_lattice_move;
use crate::replica::map_replicas;
use crate::rng::walk_stream;

/// Closed-form `G(0)` on `Z^3`:
/// `sqrt(6) / (32 pi^3) Gamma(1/24) Gamma(5/24) Gamma(7/24) Gamma(11/24)`.
pub fn watson_green_z3() -> f64 {
    let pi = std::f64::consts::PI;
    6f64.sqrt() / (32.0 * pi.powi(3))
        * gamma(1.0 / 24.0)
        * gamma(5.0 / 24.0)
        * gamma(7.0 / 24.0)
        * gamma(11.0 / 24.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenEstimate {
    pub d: usize,
    pub horizon: usize,
    pub short_horizon: usize,
    pub replicas: u64,
    /// Mean visits to the origin at times `0..=horizon`.
    pub g_hat: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Same walks truncated at `short_horizon`.
    pub g_short: f64,
    pub std_error_short: f64,
}

/// Visits to the origin at times `0..=short` and `0..=horizon` of one walk.
pub fn origin_visits<R: Rng + ?Sized>(
    d: usize,
    horizon: usize,
    short: usize,
    rng: &mut R,
) -> (u64, u64) {
    let mut x = vec![0i32; d];
    let mut nonzero = 0usize;
    let mut visits = 1u64;
    let mut at_short = if short == 0 { 1 } else { 0 };
    for k in 1..=horizon {
        let code = draw_lattice_move(d, rng) as usize;
        let c = &mut x[code / 2];
        let before = *c;
        *c += if code.is_multiple_of(2) { 1 } else { -1 };
        if before == 0 {
            nonzero += 1;
        } else if *c == 0 {
            nonzero -= 1;
        }
        if nonzero == 0 {
            visits += 1;
        }
        if k == short {
            at_short = visits;
        }
    }
    (at_short, visits)
}

/// Estimate `G(0)` from `replicas` walks of length `horizon`. The same walks
/// truncated at `short_horizon` (default `horizon / 10`) give a second
/// estimate that exposes the truncation bias.
pub fn green_function_mc(
    d: usize,
    horizon: usize,
    replicas: u64,
    seed: u64,
    short_horizon: Option<usize>,
    threads: Option<usize>,
) -> Result<GreenEstimate> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "the walk is recurrent for d = {d}; need d >= 3"
        )));
    }
    let short = short_horizon.unwrap_or(horizon / 10);
    if short > horizon {
        return Err(Error::InvalidParameter(format!(
            "short horizon {short} exceeds horizon {horizon}"
        )));
    }
    let counts = map_replicas(
        replicas,
        threads,
        || (),
        |_, r| Ok(origin_visits(d, horizon, short, &mut walk_stream(seed, r))),
    )?;
    let long: Vec<f64> = counts.iter().map(|c| c.1 as f64).collect();
    let shrt: Vec<f64> = counts.iter().map(|c| c.0 as f64).collect();
    let ml = MeanEstimate::from_samples(&long)?;
    let ms = MeanEstimate::from_samples(&shrt)?;
    let (ci_low, ci_high) = ml.ci();
    Ok(GreenEstimate {
        d,
        horizon,
        short_horizon: short,
        replicas,
        g_hat: ml.mean,
        std_error: ml.std_error,
        ci_low,
        ci_high,
        g_short: ms.mean,
        std_error_short: ms.std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn watson_value() {
        assert!((watson_green_z3() - 1.516_386_059_1).abs() < 1e-9);
    }

    #[test]
    fn recurrent_dimensions_rejected() {
        assert!(green_function_mc(2, 10, 10, 1, None, None).is_err());
        assert!(green_function_mc(3, 10, 10, 1, Some(11), None).is_err());
    }

    #[test]
    fn high_dimension_rarely_returns() {
        let g = green_function_mc(40, 2000, 2000, 1, None, Some(1)).unwrap();
        assert!(g.g_hat >= 1.0 && g.g_hat < 1.05);
        assert!(g.g_short <= g.g_hat);
    }

    #[test]
    fn z3_near_closed_form() {
        let g = green_function_mc(3, 20_000, 4000, 11, None, Some(1)).unwrap();
        let exact = watson_green_z3();
        // truncation at 2e4 steps removes about 0.005
        assert!((g.g_hat - exact).abs() < 4.0 * g.std_error + 0.01, "{g:?}");
    }
}
