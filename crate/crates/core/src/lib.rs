//! Random walks in random scenery on regular trees and cubic lattices.
//!
//! Walks, local times and regeneration times are integer objects. Scenery
//! values and everything summed from them are generic over [`Scalar`]; the
//! aliases below fix the two instantiations used in practice, `f64` and
//! exact rationals.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod graph;
pub mod local_time;
pub mod regeneration;
pub mod replica;
pub mod rng;
pub mod scalar;
pub mod scenery;
pub mod sites;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{run_walk, Graph, VertexId, WalkTrace};
pub use local_time::{build_ledger, LedgerSummary, LocalTimeLedger};
pub use regeneration::{detect_regenerations, RegenerationRecord};
pub use scalar::Scalar;
pub use scenery::SceneryDistribution;

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type Summary = stats::RwrsSummary<f64>;
pub type ExactSummary = stats::RwrsSummary<Exact>;
pub type Assignment = scenery::SceneryAssignment<f64>;
pub type ExactAssignment = scenery::SceneryAssignment<Exact>;
pub type Decomposition = stats::Decomposition<f64>;
pub type ExactDecomposition = stats::Decomposition<Exact>;
pub type OracleResult = estimators::oracle::OracleResult<f64>;
pub type ConfinementResult = estimators::confinement::ConfinementResult<f64>;
