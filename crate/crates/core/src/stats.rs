//! Scenery sums, the self-normalized statistic, the three-cell decompositions
//! and the moment quantities of the lower-bound argument.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexId, WalkTrace};
use crate::local_time::LocalTimeLedger;
use crate::scalar::{CompensatedSum, Scalar};
use crate::scenery::{SceneryAssignment, SceneryDistribution};

/// `T_n`, `V_n^2`, `L_{n,2}^2` and `W_n` of one replica.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RwrsSummary<S> {
    pub t: S,
    pub v2: S,
    pub silt2: u64,
    pub n: u64,
    /// `None` when `V_n^2 = 0`.
    pub w: Option<f64>,
}

/// `T sqrt(n+1) / (sqrt(V2) sqrt(silt2))`, or `None` if `V2 <= 0`.
pub fn self_normalized(t: f64, v2: f64, silt2: u64, n: u64) -> Option<f64> {
    if !(v2 > 0.0) || silt2 == 0 {
        return None;
    }
    Some(t / v2.sqrt() * ((n + 1) as f64 / silt2 as f64).sqrt())
}

impl<S: Scalar> RwrsSummary<S> {
    /// `W_n^2` with the sign of `T_n`, computed in `S` without square roots.
    pub fn signed_w_squared(&self) -> Option<S> {
        if !(self.v2 > S::zero()) {
            return None;
        }
        let num = self.t.clone() * self.t.clone() * S::from_count(self.n + 1);
        let den = self.v2.clone() * S::from_count(self.silt2);
        let w2 = num / den;
        Some(if self.t < S::zero() { -w2 } else { w2 })
    }

    pub fn into_f64(&self) -> RwrsSummary<f64> {
        RwrsSummary {
            t: self.t.to_real(),
            v2: self.v2.to_real(),
            silt2: self.silt2,
            n: self.n,
            w: self.w,
        }
    }
}

fn check_coverage<S: Scalar>(
    ledger: &LocalTimeLedger,
    scenery: &SceneryAssignment<S>,
) -> Result<()> {
    let need = ledger.sites().len();
    if scenery.len() < need {
        return Err(Error::InvalidParameter(format!(
            "scenery covers {} sites but the ledger has {need}",
            scenery.len()
        )));
    }
    Ok(())
}

/// Vertex-aggregated sums `T_n = sum l(v) xi(v)` and `V_n^2 = sum l(v) xi(v)^2`.
pub fn compute_summary<S: Scalar>(
    ledger: &LocalTimeLedger,
    scenery: &SceneryAssignment<S>,
) -> Result<RwrsSummary<S>> {
    check_coverage(ledger, scenery)?;
    let mut t = CompensatedSum::new();
    let mut v2 = CompensatedSum::new();
    for (site, l) in ledger.iter() {
        let xi = scenery.value(site);
        let lt = S::from_count(l);
        let lx = lt * xi.clone();
        v2.add(lx.clone() * xi.clone());
        t.add(lx);
    }
    let (t, v2) = (t.value(), v2.value());
    let w = self_normalized(t.to_real(), v2.to_real(), ledger.silt2(), ledger.n());
    Ok(RwrsSummary {
        t,
        v2,
        silt2: ledger.silt2(),
        n: ledger.n(),
        w,
    })
}

/// `sum_{k=0}^n xi(S_k)` accumulated along the trace.
pub fn time_ordered_sum<S: Scalar>(trace: &WalkTrace, xi: impl Fn(&VertexId) -> S) -> S {
    trace
        .vertices()
        .map(|v| xi(&v))
        .collect::<CompensatedSum<S>>()
        .value()
}

/// Which scenery values count as moderate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneryCut {
    /// `xi(v)` below the threshold.
    OneSided,
    /// `|xi(v)|` below the threshold.
    TwoSided,
}

/// Cell 0: small local time and moderate scenery; cell 1: small local time
/// and large scenery; cell 2: large local time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition<S> {
    pub parts_t: [S; 3],
    pub parts_v2: [S; 3],
    /// Number of vertices per cell.
    pub populations: [u64; 3],
    /// Total local time per cell.
    pub masses: [u64; 3],
    pub lt_threshold: f64,
    pub scenery_threshold: f64,
}

impl<S: Scalar> Decomposition<S> {
    pub fn total_t(&self) -> S {
        self.parts_t.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn total_v2(&self) -> S {
        self.parts_v2.iter().cloned().fold(S::zero(), |a, b| a + b)
    }
}

#[derive(Clone, Copy)]
enum Inclusive {
    Strict,
    Closed,
}

fn below<S: Scalar>(x: &S, thr: &S, mode: Inclusive) -> bool {
    match mode {
        Inclusive::Strict => x < thr,
        Inclusive::Closed => x <= thr,
    }
}

fn decompose<S: Scalar>(
    ledger: &LocalTimeLedger,
    scenery: &SceneryAssignment<S>,
    lt_threshold: f64,
    scenery_threshold: f64,
    cut: SceneryCut,
    mode: Inclusive,
) -> Result<Decomposition<S>> {
    check_coverage(ledger, scenery)?;
    let xi_thr = S::from_real(scenery_threshold);
    let mut t: [S; 3] = std::array::from_fn(|_| S::zero());
    let mut v2: [S; 3] = std::array::from_fn(|_| S::zero());
    let mut populations = [0u64; 3];
    let mut masses = [0u64; 3];
    for (site, l) in ledger.iter() {
        let xi = scenery.value(site);
        let small_lt = match mode {
            Inclusive::Strict => (l as f64) < lt_threshold,
            Inclusive::Closed => (l as f64) <= lt_threshold,
        };
        let cell = if !small_lt {
            2
        } else {
            let moderate = match cut {
                SceneryCut::OneSided => below(xi, &xi_thr, mode),
                SceneryCut::TwoSided => below(&xi.abs(), &xi_thr, mode),
            };
            if moderate {
                0
            } else {
                1
            }
        };
        let lx = S::from_count(l) * xi.clone();
        v2[cell] = v2[cell].clone() + lx.clone() * xi.clone();
        t[cell] = t[cell].clone() + lx;
        populations[cell] += 1;
        masses[cell] += l;
    }
    Ok(Decomposition {
        parts_t: t,
        parts_v2: v2,
        populations,
        masses,
        lt_threshold,
        scenery_threshold,
    })
}

fn check_n_y(n: u64, y: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "decomposition needs n >= 3, got {n}"
        )));
    }
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "y must be positive, got {y}"
        )));
    }
    Ok(())
}

/// `sqrt(n) / (y ln^2 n)`.
pub fn scenery_threshold(n: u64, y: f64) -> f64 {
    let ln = (n as f64).ln();
    (n as f64).sqrt() / (y * ln * ln)
}

/// `(4 / lambda) ln n`.
pub fn tree_lt_threshold(n: u64, lambda: f64) -> f64 {
    4.0 / lambda * (n as f64).ln()
}

/// `y^(4/(d+2)) (ln n)^(d/(d+2))`.
pub fn lattice_lt_threshold(n: u64, y: f64, d: usize) -> f64 {
    let d = d as f64;
    y.powf(4.0 / (d + 2.0)) * (n as f64).ln().powf(d / (d + 2.0))
}

/// Tree decomposition with strict cells `l(v) < (4/lambda) ln n` and
/// `xi(v) < sqrt(n)/(y ln^2 n)`.
pub fn decompose_tree<S: Scalar>(
    ledger: &LocalTimeLedger,
    scenery: &SceneryAssignment<S>,
    y: f64,
    lambda: f64,
    cut: SceneryCut,
) -> Result<Decomposition<S>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let n = ledger.n();
    check_n_y(n, y)?;
    decompose(
        ledger,
        scenery,
        tree_lt_threshold(n, lambda),
        scenery_threshold(n, y),
        cut,
        Inclusive::Strict,
    )
}

/// Lattice decomposition with closed cells `l(z) <= y^(4/(d+2)) (ln n)^(d/(d+2))`
/// and `xi(z) <= sqrt(n)/(y ln^2 n)`.
pub fn decompose_lattice<S: Scalar>(
    ledger: &LocalTimeLedger,
    scenery: &SceneryAssignment<S>,
    y: f64,
    d: usize,
    cut: SceneryCut,
) -> Result<Decomposition<S>> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "lattice dimension must be >= 3, got {d}"
        )));
    }
    let n = ledger.n();
    check_n_y(n, y)?;
    decompose(
        ledger,
        scenery,
        lattice_lt_threshold(n, y, d),
        scenery_threshold(n, y),
        cut,
        Inclusive::Closed,
    )
}

/// Moments of `eta = 2 b xi - b^2 xi^2` and the aggregated quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NagaevQuantities {
    pub b: f64,
    pub eta_mean: f64,
    pub eta_var: f64,
    /// `E|eta - E eta|^3`.
    pub eta_abs3: f64,
    /// `M_n^2 = L_{n,2}^2 Var(eta)`.
    pub m2: f64,
    /// `Gamma_n = L_{n,3}^3 E|eta - E eta|^3`.
    pub gamma: f64,
    /// `Gamma_n / M_n^3`; NaN when degenerate.
    pub q: f64,
    /// `2 y^2 L_{n,2}^2 / ((n+1) M_n)`; NaN when degenerate.
    pub x: f64,
    /// `b = 0`, so `M_n = 0`.
    pub degenerate: bool,
}

/// `E|eta - E eta|^3` for `eta = 2 b xi - b^2 xi^2`.
pub fn eta_centered_abs3(dist: &SceneryDistribution, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let mean = -b * b * dist.variance();
    // roots of eta(x) = mean
    let r = (1.0 + b * b * dist.variance()).sqrt();
    let breaks = [(1.0 - r) / b, (1.0 + r) / b];
    dist.expect(
        |x| {
            let e = 2.0 * b * x - b * b * x * x - mean;
            e.abs().powi(3)
        },
        &breaks,
    )
}

pub fn nagaev_quantities(
    ledger: &LocalTimeLedger,
    dist: &SceneryDistribution,
    y: f64,
) -> Result<NagaevQuantities> {
    dist.validate()?;
    if !dist.has_finite_abs_moment(6.0) {
        return Err(Error::InfiniteMoment {
            order: 6.0,
            dist: dist.to_string(),
        });
    }
    let n = ledger.n();
    if n == 0 {
        return Err(Error::DegenerateRun);
    }
    let m = dist.moments()?;
    let silt2 = ledger.silt2() as f64;
    let silt3 = ledger.silt3() as f64;
    let b = y * silt2.sqrt() / n as f64;
    let eta_mean = -b * b * m.second;
    let eta_var = 4.0 * b * b * m.second - 4.0 * b.powi(3) * m.third
        + b.powi(4) * (m.fourth - m.second * m.second);
    let eta_abs3 = eta_centered_abs3(dist, b);
    let m2 = silt2 * eta_var;
    let gamma = silt3 * eta_abs3;
    let degenerate = b == 0.0 || m2 <= 0.0;
    let (q, x) = if degenerate {
        (f64::NAN, f64::NAN)
    } else {
        let mn = m2.sqrt();
        (
            gamma / (m2 * mn),
            2.0 * y * y * silt2 / ((n + 1) as f64 * mn),
        )
    };
    Ok(NagaevQuantities {
        b,
        eta_mean,
        eta_var,
        eta_abs3,
        m2,
        gamma,
        q,
        x,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn o() -> VertexId {
        VertexId::Tree(vec![])
    }
    fn a() -> VertexId {
        VertexId::Tree(vec![0])
    }

    fn oao() -> LocalTimeLedger {
        let mut l = LocalTimeLedger::new(Graph::Tree { d: 2 });
        for v in [o(), a(), o()] {
            l.record_visit(&v).unwrap();
        }
        l
    }

    #[test]
    fn small_trace_summary() {
        let l = oao();
        // site 0 is o, site 1 is a
        let s = SceneryAssignment::from_values(SceneryDistribution::Rademacher, 0, vec![1.0, -2.0]);
        let r = compute_summary(&l, &s).unwrap();
        assert_eq!((r.t, r.v2, r.w), (0.0, 6.0, Some(0.0)));
    }

    #[test]
    fn constant_scenery_hits_cauchy_schwarz_bound() {
        let l = oao();
        let s = SceneryAssignment::from_values(SceneryDistribution::Rademacher, 0, vec![0.5, 0.5]);
        let r = compute_summary(&l, &s).unwrap();
        assert_eq!(r.t, 1.5);
        assert_eq!(r.v2, 0.75);
        assert!((r.w.unwrap() - 3.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_scenery_flags_w() {
        let l = oao();
        let s = SceneryAssignment::from_values(SceneryDistribution::Rademacher, 0, vec![0.0, 0.0]);
        assert_eq!(compute_summary(&l, &s).unwrap().w, None);
        let short = SceneryAssignment::from_values(SceneryDistribution::Rademacher, 0, vec![0.0]);
        assert!(compute_summary(&l, &short).is_err());
    }

    #[test]
    fn decomposition_cells() {
        let mut l = oao();
        l.record_visit(&a()).unwrap();
        let s = SceneryAssignment::from_values(SceneryDistribution::Rademacher, 0, vec![0.5, 0.5]);
        let d = decompose_tree(&l, &s, 1.0, 1.0, SceneryCut::OneSided).unwrap();
        assert_eq!(d.parts_t[1], 0.0);
        assert_eq!(d.parts_v2[1], 0.0);
        assert_eq!(d.total_t(), 2.0);
        assert_eq!(d.populations, [2, 0, 0]);
        assert!(decompose_tree(&l, &s, 1.0, 0.0, SceneryCut::OneSided).is_err());
        assert!(decompose_lattice(&l, &s, 1.0, 2, SceneryCut::OneSided).is_err());
    }

    #[test]
    fn rademacher_nagaev_closed_form() {
        let l = oao();
        let q = nagaev_quantities(&l, &SceneryDistribution::Rademacher, 1.0).unwrap();
        let b = 5f64.sqrt() / 2.0;
        assert!((q.b - b).abs() < 1e-15);
        assert!((q.m2 - 4.0 * b * b * 5.0).abs() < 1e-12);
        // eta - E eta = 2b xi is +-2b
        assert!((q.eta_abs3 - 8.0 * b.powi(3)).abs() < 1e-12);
        let z = nagaev_quantities(&l, &SceneryDistribution::Rademacher, 0.0).unwrap();
        assert!(z.degenerate);
        assert_eq!((z.m2, z.gamma), (0.0, 0.0));
        let p = SceneryDistribution::SymmetricPareto { alpha: 5.0 };
        assert!(matches!(
            nagaev_quantities(&l, &p, 1.0),
            Err(Error::InfiniteMoment { .. })
        ));
    }

    #[test]
    fn gaussian_eta_abs3_matches_brute_force() {
        use crate::rng::walk_stream;
        let dist = SceneryDistribution::Gaussian { sigma: 1.0 };
        let b = 0.3;
        let exact = eta_centered_abs3(&dist, b);
        let mut rng = walk_stream(3, 3);
        let m = 400_000;
        let mean = -b * b;
        let mc: f64 = (0..m)
            .map(|_| {
                let x = dist.sample(&mut rng);
                (2.0 * b * x - b * b * x * x - mean).abs().powi(3)
            })
            .sum::<f64>()
            / m as f64;
        assert!((mc / exact - 1.0).abs() < 0.02, "{mc} vs {exact}");
    }
}
