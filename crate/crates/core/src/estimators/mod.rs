//! Monte Carlo and deterministic estimators built on the walk and scenery
//! layers.

pub mod bounds;
pub mod ci;
pub mod confinement;
pub mod green;
pub mod importance;
pub mod oracle;
pub mod tail;

pub use bounds::BoundCheck;
pub use ci::{ks_normal, normal_cdf, normal_sf, wilson, MeanEstimate, Z95};
pub use confinement::confinement_rate;
pub use green::{green_function_mc, watson_green_z3, GreenEstimate};
pub use importance::{optimal_tilt, tail_is_conditional, tail_mc_conditional};
pub use oracle::enumerate_oracle;
pub use tail::{c_d, c_d_formula, tail_mc, tail_mc_multi, TailEstimate};
