//! Scalar abstraction for scenery values and the sums built from them.
//!
//! Everything that only needs ring arithmetic and ordering (scenery sums,
//! decompositions, enumeration) is generic over [`Scalar`], so the same code
//! runs in `f32`, `f64` or exactly in [`num_rational::BigRational`].

use std::fmt::Debug;

use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Ordered signed field element usable as a scenery value.
pub trait Scalar:
    Clone + Debug + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Lossy conversion used for thresholds and reporting.
    fn to_real(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact-when-possible conversion from a sampled `f64`.
    fn from_real(x: f64) -> Self {
        Self::from_f64(x).expect("finite scenery value")
    }

    fn from_count(k: u64) -> Self {
        Self::from_u64(k).expect("count representable")
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Neumaier-compensated accumulator. For exact scalar types the correction
/// term stays zero and this is plain summation.
#[derive(Clone, Debug)]
pub struct CompensatedSum<S> {
    sum: S,
    carry: S,
}

impl<S: Scalar> Default for CompensatedSum<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> CompensatedSum<S> {
    pub fn new() -> Self {
        Self {
            sum: S::zero(),
            carry: S::zero(),
        }
    }

    pub fn add(&mut self, x: S) {
        let t = self.sum.clone() + x.clone();
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry.clone() + ((self.sum.clone() - t.clone()) + x);
        } else {
            self.carry = self.carry.clone() + ((x - t.clone()) + self.sum.clone());
        }
        self.sum = t;
    }

    pub fn value(&self) -> S {
        self.sum.clone() + self.carry.clone()
    }
}

impl<S: Scalar> FromIterator<S> for CompensatedSum<S> {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<S: Scalar, I: IntoIterator<Item = S>>(iter: I) -> S {
    iter.into_iter().collect::<CompensatedSum<S>>().value()
}
