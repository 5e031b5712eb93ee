//! Plot-ready projection of tail estimates.

use rwrs_core::estimators::TailEstimate;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub y: f64,
    pub p_hat: f64,
    /// `ln p_hat`; NaN when `p_hat = 0`.
    pub log_p: f64,
    pub rate: f64,
    pub lattice_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicas: u64,
}

/// One row per estimate, in input order.
pub fn emit_plot_data(estimates: &[TailEstimate]) -> Result<Vec<PlotRow>, CliError> {
    if estimates.is_empty() {
        return Err(rwrs_core::Error::EmptySample.into());
    }
    Ok(estimates
        .iter()
        .map(|e| PlotRow {
            y: e.y,
            p_hat: e.p_hat,
            log_p: if e.p_hat > 0.0 {
                e.p_hat.ln()
            } else {
                f64::NAN
            },
            rate: e.rate,
            lattice_rate: e.lattice_rate,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            replicas: e.replicas,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_per_estimate() {
        let es: Vec<_> = [(1.0, 50), (2.0, 5), (3.0, 0)]
            .iter()
            .map(|&(y, h)| TailEstimate::from_hits(y, h, 1000, None))
            .collect();
        let rows = emit_plot_data(&es).unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[0].log_p - 0.05f64.ln()).abs() < 1e-15);
        assert!(rows[2].rate.is_nan() && rows[2].log_p.is_nan());
        assert!(emit_plot_data(&[]).is_err());
    }
}
