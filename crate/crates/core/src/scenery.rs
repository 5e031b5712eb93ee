//! Scenery laws and per-vertex scenery assignments.
//!
//! Every law is centered and symmetric. Values are drawn from a generator
//! keyed by `(seed, vertex key)`, so the value of a vertex does not depend on
//! when, or whether, other vertices were sampled.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use libm::{lgamma as ln_gamma, tgamma as gamma};
use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::local_time::LocalTimeLedger;
use crate::rng::keyed;
use crate::scalar::Scalar;

/// Scenery law, serialized as `{"kind": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SceneryDistribution {
    Gaussian {
        sigma: f64,
    },
    Rademacher,
    /// Density `alpha/2 (1 + |t|)^(-1-alpha)`; `E|xi|^m < inf` iff `m < alpha`.
    SymmetricPareto {
        alpha: f64,
    },
    /// Uniform on `[-a, a]`.
    UniformCentered {
        a: f64,
    },
    /// The inner law rescaled to unit variance.
    Standardized(Box<SceneryDistribution>),
}

/// `E xi^2`, `E xi^3`, `E xi^4` and `E|xi|^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub second: f64,
    pub third: f64,
    pub fourth: f64,
    pub abs_third: f64,
}

impl fmt::Display for SceneryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneryDistribution::Gaussian { sigma } => write!(f, "gaussian({sigma})"),
            SceneryDistribution::Rademacher => write!(f, "rademacher"),
            SceneryDistribution::SymmetricPareto { alpha } => {
                write!(f, "symmetric_pareto({alpha})")
            }
            SceneryDistribution::UniformCentered { a } => write!(f, "uniform_centered({a})"),
            SceneryDistribution::Standardized(inner) => write!(f, "standardized({inner})"),
        }
    }
}

/// `sign * (u^(-1/alpha) - 1)`: inverse CDF of `|xi|` (CDF `1 - (1+t)^-alpha`)
/// with an explicit sign.
pub fn symmetric_pareto_sample(alpha: f64, u: f64, sign: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "u must lie in (0, 1), got {u}"
        )));
    }
    Ok(sign.signum() * (u.powf(-1.0 / alpha) - 1.0))
}

/// `ln(sinh(x) / x)`, stable for small and large `|x|`.
fn ln_sinhc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-4 {
        ax * ax / 6.0
    } else {
        ax + (-(-2.0 * ax).exp()).ln_1p() - (2.0 * ax).ln()
    }
}

/// `ln cosh(x)`.
fn ln_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2
}

/// `d/dx ln(sinh(x)/x) = coth(x) - 1/x`.
fn d_ln_sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        x / 3.0
    } else {
        1.0 / x.tanh() - 1.0 / x
    }
}

impl SceneryDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!(
                "{what} must be positive and finite, got {v}"
            )))
        };
        match self {
            SceneryDistribution::Gaussian { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                bad("sigma", *sigma)
            }
            SceneryDistribution::SymmetricPareto { alpha }
                if !(*alpha > 0.0 && alpha.is_finite()) =>
            {
                bad("alpha", *alpha)
            }
            SceneryDistribution::SymmetricPareto { alpha } if *alpha <= 2.0 => {
                Err(Error::InfiniteMoment {
                    order: 2.0,
                    dist: self.to_string(),
                })
            }
            SceneryDistribution::UniformCentered { a } if !(*a > 0.0 && a.is_finite()) => {
                bad("a", *a)
            }
            SceneryDistribution::Standardized(inner) => inner.validate(),
            _ => Ok(()),
        }
    }

    pub fn standardized(self) -> Self {
        SceneryDistribution::Standardized(Box::new(self))
    }

    /// Multiplier applied by the standardizing wrapper (1 for plain laws).
    fn scale(&self) -> f64 {
        match self {
            SceneryDistribution::Standardized(inner) => {
                1.0 / inner
                    .abs_moment(2.0)
                    .expect("validated law has finite variance")
                    .sqrt()
            }
            _ => 1.0,
        }
    }

    /// Moments `E|xi|^m` are finite exactly for `m` below this bound; `None`
    /// means all moments are finite.
    pub fn finite_moment_bound(&self) -> Option<f64> {
        match self {
            SceneryDistribution::SymmetricPareto { alpha } => Some(*alpha),
            SceneryDistribution::Standardized(inner) => inner.finite_moment_bound(),
            _ => None,
        }
    }

    pub fn has_finite_abs_moment(&self, m: f64) -> bool {
        self.finite_moment_bound().is_none_or(|b| m < b)
    }

    /// `E|xi|^m` in closed form.
    pub fn abs_moment(&self, m: f64) -> Result<f64> {
        if !self.has_finite_abs_moment(m) {
            return Err(Error::InfiniteMoment {
                order: m,
                dist: self.to_string(),
            });
        }
        Ok(match self {
            SceneryDistribution::Gaussian { sigma } => {
                sigma.powf(m) * 2f64.powf(m / 2.0) * gamma((m + 1.0) / 2.0) / PI.sqrt()
            }
            SceneryDistribution::Rademacher => 1.0,
            SceneryDistribution::SymmetricPareto { alpha } => {
                // alpha * B(m + 1, alpha - m)
                (alpha.ln() + ln_gamma(m + 1.0) + ln_gamma(alpha - m) - ln_gamma(alpha + 1.0)).exp()
            }
            SceneryDistribution::UniformCentered { a } => a.powf(m) / (m + 1.0),
            SceneryDistribution::Standardized(inner) => {
                self.scale().powf(m) * inner.abs_moment(m)?
            }
        })
    }

    /// `E xi^k`; odd moments vanish by symmetry when `E|xi|^k` is finite.
    pub fn raw_moment(&self, k: u32) -> Result<f64> {
        let abs = self.abs_moment(k as f64)?;
        Ok(if k % 2 == 1 { 0.0 } else { abs })
    }

    pub fn variance(&self) -> f64 {
        self.abs_moment(2.0)
            .expect("validated law has finite variance")
    }

    /// `E xi^2`, `E xi^3`, `E xi^4`, `E|xi|^3`; fails if `E xi^4` is infinite.
    pub fn moments(&self) -> Result<Moments> {
        Ok(Moments {
            second: self.raw_moment(2)?,
            third: self.raw_moment(3)?,
            fourth: self.raw_moment(4)?,
            abs_third: self.abs_moment(3.0)?,
        })
    }

    /// Atoms `(value, probability)` of a finitely supported law.
    pub fn finite_support(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            SceneryDistribution::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            SceneryDistribution::Standardized(inner) => {
                let c = self.scale();
                inner
                    .finite_support()
                    .map(|atoms| atoms.into_iter().map(|(x, p)| (c * x, p)).collect())
            }
            _ => None,
        }
    }

    /// Draw one value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SceneryDistribution::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            SceneryDistribution::Rademacher => {
                if rng.random::<f64>() < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            SceneryDistribution::SymmetricPareto { alpha } => {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let u: f64 = rng.sample(Open01);
                sign * (u.powf(-1.0 / alpha) - 1.0)
            }
            SceneryDistribution::UniformCentered { a } => a * (2.0 * rng.random::<f64>() - 1.0),
            SceneryDistribution::Standardized(inner) => self.scale() * inner.sample(rng),
        }
    }

    /// Log moment generating function `psi(s) = ln E exp(s xi)`.
    pub fn log_mgf(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        match self {
            SceneryDistribution::Gaussian { sigma } => Ok(0.5 * sigma * sigma * s * s),
            SceneryDistribution::Rademacher => Ok(ln_cosh(s)),
            SceneryDistribution::UniformCentered { a } => Ok(ln_sinhc(a * s)),
            SceneryDistribution::SymmetricPareto { .. } => Err(Error::TiltOutsideDomain {
                tilt: s,
                dist: self.to_string(),
            }),
            SceneryDistribution::Standardized(inner) => inner.log_mgf(self.scale() * s),
        }
    }

    /// `psi'(s)`, the mean of the `s`-tilted law.
    pub fn tilted_mean(&self, s: f64) -> Result<f64> {
        match self {
            SceneryDistribution::Gaussian { sigma } => Ok(sigma * sigma * s),
            SceneryDistribution::Rademacher => Ok(s.tanh()),
            SceneryDistribution::UniformCentered { a } => Ok(a * d_ln_sinhc(a * s)),
            SceneryDistribution::SymmetricPareto { .. } if s == 0.0 => Ok(0.0),
            SceneryDistribution::SymmetricPareto { .. } => Err(Error::TiltOutsideDomain {
                tilt: s,
                dist: self.to_string(),
            }),
            SceneryDistribution::Standardized(inner) => {
                let c = self.scale();
                Ok(c * inner.tilted_mean(c * s)?)
            }
        }
    }

    /// Draw from the exponentially tilted law `exp(s x - psi(s)) P(dx)`.
    /// With `s = 0` this consumes the generator exactly like [`Self::sample`].
    pub fn sample_tilted<R: Rng + ?Sized>(&self, s: f64, rng: &mut R) -> Result<f64> {
        if s == 0.0 {
            return Ok(self.sample(rng));
        }
        match self {
            SceneryDistribution::Gaussian { sigma } => {
                Ok(sigma * rng.sample::<f64, _>(StandardNormal) + sigma * sigma * s)
            }
            SceneryDistribution::Rademacher => {
                let p_plus = 1.0 / (1.0 + (-2.0 * s).exp());
                Ok(if rng.random::<f64>() < p_plus {
                    1.0
                } else {
                    -1.0
                })
            }
            SceneryDistribution::UniformCentered { a } => {
                let u: f64 = rng.random();
                let t = s.abs();
                // inverse CDF of the density proportional to exp(t x) on [-a, a]
                let x = a + (u + (1.0 - u) * (-2.0 * t * a).exp()).ln() / t;
                Ok(if s > 0.0 { x } else { -x })
            }
            SceneryDistribution::SymmetricPareto { .. } => Err(Error::TiltOutsideDomain {
                tilt: s,
                dist: self.to_string(),
            }),
            SceneryDistribution::Standardized(inner) => {
                let c = self.scale();
                Ok(c * inner.sample_tilted(c * s, rng)?)
            }
        }
    }

    /// Density of a continuous law.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            SceneryDistribution::Gaussian { sigma } => {
                let z = x / sigma;
                Some((-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt()))
            }
            SceneryDistribution::Rademacher => None,
            SceneryDistribution::SymmetricPareto { alpha } => {
                Some(0.5 * alpha * (1.0 + x.abs()).powf(-1.0 - alpha))
            }
            SceneryDistribution::UniformCentered { a } => {
                Some(if x.abs() <= *a { 0.5 / a } else { 0.0 })
            }
            SceneryDistribution::Standardized(inner) => {
                let c = self.scale();
                inner.density(x / c).map(|p| p / c)
            }
        }
    }

    /// Support endpoints of a continuous law.
    fn support(&self) -> (f64, f64) {
        match self {
            SceneryDistribution::UniformCentered { a } => (-a, *a),
            SceneryDistribution::Standardized(inner) => {
                let c = self.scale();
                let (lo, hi) = inner.support();
                (c * lo, c * hi)
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `E f(xi)`: exact for finitely supported laws, otherwise adaptive
    /// double-exponential quadrature against the density, split at `breaks`
    /// (kinks of `f`) and at 0.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> f64 {
        if let Some(atoms) = self.finite_support() {
            return atoms.iter().map(|&(x, p)| p * f(x)).sum();
        }
        let (lo, hi) = self.support();
        let mut cuts: Vec<f64> = breaks
            .iter()
            .copied()
            .chain(std::iter::once(0.0))
            .filter(|&b| b > lo && b < hi && b.is_finite())
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut points = vec![lo];
        points.extend(cuts);
        points.push(hi);
        let g = |x: f64| {
            let p = self.density(x).unwrap_or(0.0);
            if p == 0.0 {
                0.0
            } else {
                f(x) * p
            }
        };
        points
            .windows(2)
            .map(|w| integrate_interval(&g, w[0], w[1]))
            .sum()
    }
}

const QUAD_TOL: f64 = 1e-13;

fn integrate_interval<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => quadrature::integrate(g, a, b, QUAD_TOL).integral,
        (true, false) => {
            // x = a + t / (1 - t)
            let h = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                g(a + t / s) / (s * s)
            };
            quadrature::integrate(h, 0.0, 1.0, QUAD_TOL).integral
        }
        (false, true) => {
            let h = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                g(b - t / s) / (s * s)
            };
            quadrature::integrate(h, 0.0, 1.0, QUAD_TOL).integral
        }
        (false, false) => integrate_interval(g, a, 0.0) + integrate_interval(g, 0.0, b),
    }
}

/// Scenery value of the vertex with canonical key `key` under `seed`.
#[inline]
pub fn keyed_value(dist: &SceneryDistribution, key: u64, seed: u64) -> f64 {
    dist.sample(&mut keyed(seed, key))
}

/// One draw per vertex, each a pure function of `(dist, vertex, seed)`.
pub fn sample_assignment<'a, I>(
    dist: &SceneryDistribution,
    vertices: I,
    seed: u64,
) -> HashMap<VertexId, f64>
where
    I: IntoIterator<Item = &'a VertexId>,
{
    vertices
        .into_iter()
        .map(|v| (v.clone(), keyed_value(dist, v.key(), seed)))
        .collect()
}

/// Scenery values for the sites of a ledger: `values[s]` is `xi` at site `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneryAssignment<S> {
    pub dist: SceneryDistribution,
    pub seed: u64,
    values: Vec<S>,
}

impl<S: Scalar> SceneryAssignment<S> {
    /// Draw a value for every site of `ledger`.
    pub fn sample(dist: &SceneryDistribution, ledger: &LocalTimeLedger, seed: u64) -> Self {
        let mut out = Self::from_values(dist.clone(), seed, Vec::new());
        out.resample(ledger, seed);
        out
    }

    /// Redraw in place for another ledger, reusing the allocation.
    pub fn resample(&mut self, ledger: &LocalTimeLedger, seed: u64) {
        let sites = ledger.sites();
        self.seed = seed;
        self.values.clear();
        self.values.extend(
            (0..sites.len() as u32)
                .map(|s| S::from_real(keyed_value(&self.dist, sites.key(s), seed))),
        );
    }

    /// Hand-built assignment; `values[s]` belongs to site `s`.
    pub fn from_values(dist: SceneryDistribution, seed: u64, values: Vec<S>) -> Self {
        SceneryAssignment { dist, seed, values }
    }

    #[inline]
    pub fn value(&self, site: u32) -> &S {
        &self.values[site as usize]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at vertex `v` of `ledger`, if `v` is one of its sites.
    pub fn value_of(&self, ledger: &LocalTimeLedger, v: &VertexId) -> Option<&S> {
        ledger
            .sites()
            .find(v)
            .and_then(|s| self.values.get(s as usize))
    }

    /// Every value multiplied by `c`.
    pub fn scaled(&self, c: S) -> Self {
        Self {
            dist: self.dist.clone(),
            seed: self.seed,
            values: self.values.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-S::one())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SceneryAssignment<T> {
        SceneryAssignment {
            dist: self.dist.clone(),
            seed: self.seed,
            values: self.values.iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::walk_stream;

    #[test]
    fn json_shape() {
        let g: SceneryDistribution =
            serde_json::from_str(r#"{"kind":"gaussian","params":{"sigma":1.0}}"#).unwrap();
        assert_eq!(g, SceneryDistribution::Gaussian { sigma: 1.0 });
        let r: SceneryDistribution = serde_json::from_str(r#"{"kind":"rademacher"}"#).unwrap();
        assert_eq!(r, SceneryDistribution::Rademacher);
        let p = SceneryDistribution::SymmetricPareto { alpha: 5.0 };
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"kind":"symmetric_pareto","params":{"alpha":5.0}}"#
        );
        let s = p.clone().standardized();
        let back: SceneryDistribution =
            serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn pareto_inverse_cdf() {
        assert_eq!(symmetric_pareto_sample(1.0, 0.25, 1.0).unwrap(), 3.0);
        assert_eq!(symmetric_pareto_sample(1.0, 0.25, -1.0).unwrap(), -3.0);
        assert!(symmetric_pareto_sample(2.0, 1.0 - 1e-15, 1.0).unwrap() < 1e-14);
        assert!(symmetric_pareto_sample(2.0, 0.0, 1.0).is_err());
        assert!(symmetric_pareto_sample(2.0, 1.0, 1.0).is_err());
        assert!(symmetric_pareto_sample(0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn closed_form_moments() {
        let m = SceneryDistribution::Rademacher.moments().unwrap();
        assert_eq!((m.second, m.third, m.fourth), (1.0, 0.0, 1.0));
        let g = SceneryDistribution::Gaussian { sigma: 1.0 }
            .moments()
            .unwrap();
        assert!((g.fourth - 3.0).abs() < 1e-12);
        assert!((g.abs_third - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-12);
        let p6 = SceneryDistribution::SymmetricPareto { alpha: 6.0 };
        assert!((p6.raw_moment(2).unwrap() - 0.1).abs() < 1e-13);
        let p5 = SceneryDistribution::SymmetricPareto { alpha: 5.0 };
        assert!((p5.raw_moment(2).unwrap() - 2.0 / 12.0).abs() < 1e-13);
        let p3 = SceneryDistribution::SymmetricPareto { alpha: 3.0 };
        assert!(matches!(p3.moments(), Err(Error::InfiniteMoment { .. })));
        assert!(p3.raw_moment(2).is_ok());
        let u = SceneryDistribution::UniformCentered { a: 2.0 };
        assert!((u.variance() - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn standardized_has_unit_variance() {
        for d in [
            SceneryDistribution::Gaussian { sigma: 3.0 },
            SceneryDistribution::SymmetricPareto { alpha: 7.0 },
            SceneryDistribution::UniformCentered { a: 0.5 },
        ] {
            let s = d.standardized();
            assert!((s.variance() - 1.0).abs() < 1e-12, "{s}");
            let q = s.expect(|x| x * x, &[]);
            assert!((q - 1.0).abs() < 1e-8, "{s}: {q}");
        }
    }

    #[test]
    fn validation() {
        assert!(SceneryDistribution::Gaussian { sigma: 0.0 }
            .validate()
            .is_err());
        assert!(SceneryDistribution::SymmetricPareto { alpha: 2.0 }
            .validate()
            .is_err());
        assert!(SceneryDistribution::UniformCentered { a: -1.0 }
            .validate()
            .is_err());
        assert!(SceneryDistribution::Rademacher.validate().is_ok());
    }

    #[test]
    fn tilt_zero_matches_plain_sampling() {
        for d in [
            SceneryDistribution::Gaussian { sigma: 2.0 },
            SceneryDistribution::Rademacher,
            SceneryDistribution::UniformCentered { a: 1.5 },
            SceneryDistribution::SymmetricPareto { alpha: 5.0 },
        ] {
            let mut a = walk_stream(9, 1);
            let mut b = walk_stream(9, 1);
            for _ in 0..50 {
                assert_eq!(d.sample(&mut a), d.sample_tilted(0.0, &mut b).unwrap());
            }
        }
        let p = SceneryDistribution::SymmetricPareto { alpha: 5.0 };
        assert!(p.sample_tilted(0.1, &mut walk_stream(1, 1)).is_err());
        assert!(p.log_mgf(0.1).is_err());
    }

    #[test]
    fn tilted_means_match_quadrature() {
        let s = 0.7;
        for d in [
            SceneryDistribution::Gaussian { sigma: 1.3 },
            SceneryDistribution::Rademacher,
            SceneryDistribution::UniformCentered { a: 2.0 },
        ] {
            let psi = d.log_mgf(s).unwrap();
            let mgf = d.expect(|x| (s * x).exp(), &[]);
            assert!((mgf.ln() - psi).abs() < 1e-9, "{d}");
            let mean = d.expect(|x| x * (s * x - psi).exp(), &[]);
            assert!((mean - d.tilted_mean(s).unwrap()).abs() < 1e-9, "{d}");
        }
    }

    #[test]
    fn tilted_uniform_stays_in_support() {
        let d = SceneryDistribution::UniformCentered { a: 1.0 };
        let mut rng = walk_stream(4, 4);
        for s in [-40.0, -0.3, 0.3, 40.0] {
            for _ in 0..1000 {
                let x = d.sample_tilted(s, &mut rng).unwrap();
                assert!((-1.0..=1.0).contains(&x));
            }
        }
    }

    #[test]
    fn keyed_values_are_order_independent() {
        let d = SceneryDistribution::Gaussian { sigma: 1.0 };
        let vs = [
            VertexId::Tree(vec![]),
            VertexId::Tree(vec![0]),
            VertexId::Tree(vec![1, 1]),
        ];
        let a = sample_assignment(&d, vs.iter(), 5);
        let b = sample_assignment(&d, vs.iter().rev(), 5);
        assert_eq!(a, b);
        let c = sample_assignment(&d, vs.iter(), 6);
        assert_ne!(a[&vs[0]], c[&vs[0]]);
    }
}
