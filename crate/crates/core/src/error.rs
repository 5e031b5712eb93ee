use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("vertex {vertex} does not belong to {graph}")]
    VertexMismatch { vertex: String, graph: String },
    #[error("degenerate run: a walk needs at least one step")]
    DegenerateRun,
    #[error("level sequence must have length at least 2, got {0}")]
    ShortLevels(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("moment E|xi|^{order} is infinite for {dist}")]
    InfiniteMoment { order: f64, dist: String },
    #[error("tilt {tilt} is outside the moment generating function domain of {dist}")]
    TiltOutsideDomain { tilt: f64, dist: String },
    #[error("empty sample")]
    EmptySample,
    #[error("instance too large for enumeration: {0} assignments")]
    InstanceTooLarge(u128),
    #[error("no effective constant at this d: c_d formula requires lambda_d > 24, got {lambda}")]
    NoEffectiveConstant { lambda: f64 },
    #[error("state space too large: {0}")]
    StateSpaceTooLarge(String),
    #[error("iteration did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
